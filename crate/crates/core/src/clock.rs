use chrono::{DateTime, SecondsFormat, Utc};

/// Source of timestamps for completions and run-log events.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clock {
    System,
    /// Always reports the same instant (seconds since the Unix epoch).
    Fixed(i64),
}

impl Clock {
    /// Honors `SOURCE_DATE_EPOCH` for reproducible runs; otherwise wall time.
    pub fn from_env() -> Self {
        std::env::var("SOURCE_DATE_EPOCH")
            .ok()
            .and_then(|v| v.trim().parse::<i64>().ok())
            .map_or(Clock::System, Clock::Fixed)
    }

    pub fn now(&self) -> String {
        let t: DateTime<Utc> = match *self {
            Clock::System => Utc::now(),
            Clock::Fixed(secs) => DateTime::from_timestamp(secs, 0).unwrap_or_default(),
        };
        t.to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_clock_formats_utc() {
        assert_eq!(Clock::Fixed(0).now(), "1970-01-01T00:00:00Z");
        assert_eq!(Clock::Fixed(1_656_633_600).now(), "2022-07-01T00:00:00Z");
    }
}
