mod common;

use aha_core::project::{Project, ProjectLock};
use aha_core::taxonomy::{apply_codes, Taxonomy};
use aha_core::Error;
use common::{crowdsource, harvest, rendered, scripted_codes};

fn pipeline(id: &str, seed: u64) -> Project {
    let t = Taxonomy::bundled();
    let mut p = rendered(id);
    harvest(&mut p, seed, 4);
    crowdsource(&mut p, seed, 0.4);
    let codes = scripted_codes(&p, &t, seed);
    apply_codes(&mut p, &t, codes).unwrap();
    p
}

#[test]
fn full_project_round_trips_byte_for_byte() {
    let p = pipeline("hiring", 2);
    p.validate().unwrap();
    let json = p.to_json().unwrap();
    let back = Project::from_json(&json).unwrap();
    assert_eq!(back, p);
    assert_eq!(back.to_json().unwrap(), json);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("hiring.json");
    p.save(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), json);
    assert_eq!(Project::load(&path).unwrap(), p);
}

#[test]
fn same_seed_same_project() {
    assert_eq!(pipeline("loan-application", 6).to_json().unwrap(), pipeline("loan-application", 6).to_json().unwrap());
}

fn reject(p: &Project) -> Error {
    Project::from_json(&p.to_json().unwrap()).unwrap_err()
}

#[test]
fn dangling_references_are_rejected() {
    let base = pipeline("loan-application", 1);

    let mut p = base.clone();
    p.matrix.as_mut().unwrap().cells[0].completion_ids.push("m/ghost".into());
    assert!(matches!(reject(&p), Error::UnknownId { kind: "completion", .. }));

    let mut p = base.clone();
    p.codes[0].completion_id = "c/ghost/1".into();
    assert!(matches!(reject(&p), Error::UnknownId { kind: "completion", .. }));

    let mut p = base.clone();
    let dup = p.completions[0].clone();
    p.completions.push(dup);
    assert!(matches!(reject(&p), Error::DuplicateId { kind: "completion", .. }));

    let mut p = base.clone();
    p.matrix.as_mut().unwrap().scenario_id = "elsewhere".into();
    assert!(matches!(reject(&p), Error::Schema { .. }));

    let mut p = base.clone();
    p.stakeholders[0].approved = false;
    assert!(matches!(reject(&p), Error::Unapproved(_)));
}

#[test]
fn unknown_schema_version_is_refused() {
    let json = rendered("hiring").to_json().unwrap().replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    assert!(matches!(Project::from_json(&json), Err(Error::SchemaVersion(99))));
}

#[test]
fn lock_is_exclusive_and_released() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let held = ProjectLock::acquire(&path).unwrap();
    assert!(matches!(ProjectLock::acquire(&path), Err(Error::Locked(_))));
    drop(held);
    ProjectLock::acquire(&path).unwrap();
}
