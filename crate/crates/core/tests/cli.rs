mod common;

use std::fs;
use std::path::PathBuf;

use histeq::io::{MappingDocument, MappingRow};
use histeq::{fixtures, to_dot};

use common::{fixture, run};

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

// Set UPDATE_GOLDEN=1 to rewrite the files after reviewing a change.
fn check_golden(name: &str, actual: &str) {
    let file = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        fs::create_dir_all(file.parent().unwrap()).unwrap();
        fs::write(&file, actual).unwrap();
    }
    let expected = fs::read_to_string(&file).unwrap();
    assert_eq!(actual, expected, "{name} differs from golden copy");
}

fn markings(list: &str) -> Vec<Vec<String>> {
    list.split(';')
        .filter(|s| !s.is_empty())
        .map(parse_braced)
        .collect()
}

fn parse_braced(s: &str) -> Vec<String> {
    let inner = s
        .trim()
        .strip_prefix('{')
        .unwrap()
        .strip_suffix('}')
        .unwrap();
    inner
        .split(',')
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect()
}

fn from_csv(text: &str, old_net: &str, new_net: &str) -> MappingDocument {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        reader.headers().unwrap(),
        vec!["old_marking", "equivalents", "change_region"]
    );
    let rows = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            MappingRow {
                old_marking: parse_braced(&r[0]),
                equivalents: markings(&r[1]),
                change_region: r[2].parse().unwrap(),
            }
        })
        .collect();
    MappingDocument {
        old_net: old_net.into(),
        new_net: new_net.into(),
        rows,
    }
}

fn from_table(text: &str) -> MappingDocument {
    let mut lines = text.lines();
    let head = lines.next().unwrap();
    let name_in = |s: &str| s[s.find('(').unwrap() + 1..s.find(')').unwrap()].to_string();
    let split = head.find("NEW EQUIVALENT").unwrap();
    let (old_net, new_net) = (name_in(&head[..split]), name_in(&head[split..]));
    let rows = lines
        .map(|line| {
            let close = line.find('}').unwrap();
            let old_marking = parse_braced(&line[..=close]);
            let rest = line[close + 1..].trim();
            if rest == "- (change region)" {
                MappingRow {
                    old_marking,
                    equivalents: vec![],
                    change_region: true,
                }
            } else {
                MappingRow {
                    old_marking,
                    equivalents: markings(&rest.replace("}, {", "};{")),
                    change_region: false,
                }
            }
        })
        .collect();
    MappingDocument {
        old_net,
        new_net,
        rows,
    }
}

#[test]
fn help_and_version_succeed() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("map"));
    let r = run(&["--version"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains(env!("CARGO_PKG_VERSION")));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&[]).code, 2);
    assert_eq!(run(&["frobnicate"]).code, 2);
    assert_eq!(run(&["tts", &path("sequence")]).code, 2);
    let r = run(&[
        "map",
        "--old",
        &path("sequence"),
        "--new",
        &path("sequence"),
        "--format",
        "xml",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
}

#[test]
fn unreadable_and_malformed_files_exit_2() {
    let r = run(&["validate", "/nonexistent/net.json"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("cannot read"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"name\": \"x\", \"places\": [").unwrap();
    let r = run(&["validate", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("PARSE_ERROR"));

    fs::write(
        &bad,
        r#"{"name": "x", "places": ["a"], "transitions": [{"id": "t"}], "arcs": [["a", "zz"]]}"#,
    )
    .unwrap();
    let r = run(&["reach", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("UNKNOWN_ENDPOINT"));
}

#[test]
fn validate_reports_codes() {
    let r = run(&["validate", &path("sequence")]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "structural: ok\nbehavioral: ok\n");

    let r = run(&["validate", &path("fig2b")]);
    assert_eq!(r.code, 1);
    assert!(r.stdout.contains("NOT_ON_PATH"));
    assert!(r.stdout.contains("behavioral: skipped"));
}

#[test]
fn invalid_net_is_a_domain_error() {
    let r = run(&["reach", &path("fig2b")]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("NOT_ON_PATH"));
}

#[test]
fn state_limit_is_a_domain_error() {
    let r = run(&["reach", &path("fig8_old"), "--max-states", "3"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("STATE_LIMIT_EXCEEDED"));
}

#[test]
fn reach_writes_dot() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("fig4.dot");
    let r = run(&["reach", &path("fig4"), "--dot", dot.to_str().unwrap()]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "nodes: 7\nedges: 8\n");
    check_golden("fig4.dot", &fs::read_to_string(&dot).unwrap());
}

#[test]
fn g1_dot_golden() {
    check_golden("g1.dot", &to_dot(&fixtures::g1()));
}

#[test]
fn tts_of_a_marking() {
    let r = run(&["tts", &path("fig4"), "--marking", "P2"]);
    assert_eq!(r.code, 0);
    assert_eq!(
        r.stdout,
        "{T0}\n{T0,T1,T2,T3,T4}\n{T0,T1,T2,T3,T4,T5,T6}\n{T0,T1,T4,T5,T6}\n"
    );
    let r = run(&["tts", &path("fig4"), "--marking", "{P1}"]);
    assert_eq!(r.stdout, "{}\n");
}

#[test]
fn tts_marking_errors() {
    let r = run(&["tts", &path("fig4"), "--marking", "Q9"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("unknown place"));
    let r = run(&["tts", &path("fig4"), "--marking", "P1,P2"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("not reachable"));
}

#[test]
fn keep_empty_shows_helper_transitions() {
    let purged = run(&["tts", &path("fig8_new"), "--marking", "p4,p6"]);
    let kept = run(&[
        "tts",
        &path("fig8_new"),
        "--marking",
        "p4,p6",
        "--keep-empty",
    ]);
    assert_eq!(purged.stdout, "{t1,t2}\n");
    assert_eq!(kept.stdout, "{e1,e2,t1,t2}\n");
}

#[test]
fn oracle_subcommand_agrees_with_tts() {
    for (net, marking) in [("fig4", "P5"), ("fig7", "P1"), ("fig8_new", "p8")] {
        let fast = run(&["tts", &path(net), "--marking", marking]);
        let slow = run(&["oracle", &path(net), "--marking", marking]);
        assert_eq!(slow.code, 0);
        assert_eq!(fast.stdout, slow.stdout, "{net} {marking}");
    }
    let r = run(&["oracle", &path("fig4"), "--marking", "P2", "--bound", "2"]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("BOUND_TOO_SMALL"));
}

#[test]
fn generate_emits_parseable_sound_nets() {
    let r = run(&["generate", "--seed", "7"]);
    assert_eq!(r.code, 0);
    let net = histeq::parse_net(&r.stdout).unwrap();
    assert!(histeq::validate_structural(&net).is_ok());
    assert_eq!(run(&["generate", "--seed", "7"]).stdout, r.stdout);
    assert_eq!(run(&["generate", "--loop-probability", "1.5"]).code, 2);
}

#[test]
fn map_formats_agree() {
    let args = |fmt: &'static str| vec!["map", "--old", "OLD", "--new", "NEW", "--format", fmt];
    let (old, new) = (path("fig8_old"), path("fig8_new"));
    let go = |fmt| {
        let a: Vec<String> = args(fmt)
            .into_iter()
            .map(|s| match s {
                "OLD" => old.clone(),
                "NEW" => new.clone(),
                s => s.to_string(),
            })
            .collect();
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let r = run(&a);
        assert_eq!(r.code, 0, "{}", r.stderr);
        r.stdout
    };
    let json: MappingDocument = serde_json::from_str(&go("json")).unwrap();
    assert_eq!(json.old_net, "fig8_old");
    assert_eq!(json.new_net, "fig8_new");
    assert_eq!(from_csv(&go("csv"), "fig8_old", "fig8_new"), json);
    assert_eq!(from_table(&go("table")), json);
    assert_eq!(json.rows.len(), 13);
    assert_eq!(json.rows.iter().filter(|r| r.change_region).count(), 9);
}

#[test]
fn fail_on_change_region() {
    let (old, new) = (path("fig8_old"), path("fig8_new"));
    let r = run(&[
        "map",
        "--old",
        &old,
        "--new",
        &new,
        "--fail-on-change-region",
    ]);
    assert_eq!(r.code, 1);
    assert!(!r.stdout.is_empty());
    let r = run(&[
        "map",
        "--old",
        &old,
        "--new",
        &old,
        "--fail-on-change-region",
    ]);
    assert_eq!(r.code, 0);
}
