//! Read-only HTTP server for the report document and the UI's static files.

use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use aha_core::project::Project;
use aha_core::report::emit_report;
use aha_core::Error;
use anyhow::Result;

use crate::cli::ServeArgs;
use crate::run::read;

const FALLBACK_INDEX: &str = "<!doctype html><meta charset=\"utf-8\"><title>aha report</title>\
<p>No UI assets configured. The report document is at <a href=\"/report.json\">/report.json</a>.</p>\n";

pub fn serve(project_path: &Path, args: &ServeArgs) -> Result<()> {
    let report = match &args.report {
        Some(p) => read(p)?,
        None => {
            let project = Project::load(project_path)?;
            emit_report(&project, &project.taxonomy())?.to_json()?
        }
    };
    let listener = TcpListener::bind(&args.addr).map_err(|e| Error::io(&args.addr, e))?;
    let addr = listener.local_addr()?;
    println!("serving report on http://{addr}/");
    std::io::stdout().flush()?;
    let report = Arc::new(report);
    let assets = Arc::new(args.assets.clone());
    for stream in listener.incoming() {
        let Ok(stream) = stream else { continue };
        let (report, assets) = (Arc::clone(&report), Arc::clone(&assets));
        std::thread::spawn(move || {
            if let Err(e) = handle(stream, &report, assets.as_deref()) {
                log::debug!("connection error: {e}");
            }
        });
    }
    Ok(())
}

fn handle(mut stream: TcpStream, report: &str, assets: Option<&Path>) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    loop {
        let mut header = String::new();
        if reader.read_line(&mut header)? == 0 || header == "\r\n" || header == "\n" {
            break;
        }
    }
    let mut parts = request_line.split_whitespace();
    let (method, target) = (parts.next().unwrap_or(""), parts.next().unwrap_or("/"));
    if method != "GET" && method != "HEAD" {
        return respond(&mut stream, 405, "text/plain", b"method not allowed\n", method == "HEAD");
    }
    let path = target.split(['?', '#']).next().unwrap_or("/");
    let head = method == "HEAD";
    match path {
        "/report.json" | "/api/report" => respond(&mut stream, 200, "application/json", report.as_bytes(), head),
        _ => match resolve_asset(assets, path) {
            Some(file) => match std::fs::read(&file) {
                Ok(bytes) => respond(&mut stream, 200, content_type(&file), &bytes, head),
                Err(_) => respond(&mut stream, 404, "text/plain", b"not found\n", head),
            },
            None if path == "/" || path == "/index.html" => {
                respond(&mut stream, 200, "text/html; charset=utf-8", FALLBACK_INDEX.as_bytes(), head)
            }
            None => respond(&mut stream, 404, "text/plain", b"not found\n", head),
        },
    }
}

/// Maps a URL path into the assets directory, refusing anything that would
/// step outside it.
fn resolve_asset(assets: Option<&Path>, path: &str) -> Option<PathBuf> {
    let root = assets?;
    let rel = path.trim_start_matches('/');
    let rel = if rel.is_empty() { "index.html" } else { rel };
    let rel = Path::new(rel);
    if rel.components().any(|c| !matches!(c, Component::Normal(_))) {
        return None;
    }
    let full = root.join(rel);
    full.is_file().then_some(full)
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()).unwrap_or("") {
        "html" => "text/html; charset=utf-8",
        "js" | "mjs" => "text/javascript",
        "css" => "text/css",
        "json" => "application/json",
        "svg" => "image/svg+xml",
        "png" => "image/png",
        "ico" => "image/x-icon",
        _ => "application/octet-stream",
    }
}

fn respond(stream: &mut TcpStream, status: u16, content_type: &str, body: &[u8], head: bool) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        404 => "Not Found",
        _ => "Method Not Allowed",
    };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: {content_type}\r\nContent-Length: {}\r\n\
         Access-Control-Allow-Origin: *\r\nConnection: close\r\n\r\n",
        body.len()
    )?;
    if !head {
        stream.write_all(body)?;
    }
    stream.flush()
}
