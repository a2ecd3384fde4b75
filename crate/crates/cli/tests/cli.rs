use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use biplot_motion::fixtures;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_biplot-motion"))
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("gapminder.csv"), fixtures::gapminder_csv()).unwrap();
        fs::write(dir.path().join("climate.csv"), fixtures::climate_csv(3, 1)).unwrap();
        Workspace { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn run(&self, args: &[&str]) -> Output {
        bin().current_dir(self.dir.path()).args(args).output().unwrap()
    }
}

const GAPMINDER: [&str; 6] = ["--input", "gapminder.csv", "--time-var", "year", "--group-var", "continent"];
const CLIMATE: [&str; 6] = ["--input", "climate.csv", "--time-var", "Year", "--group-var", "Region"];

fn args<'a>(cmd: &'a str, input: &[&'a str], rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(input);
    v.extend_from_slice(rest);
    v
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[track_caller]
fn ok(o: &Output) -> String {
    assert!(o.status.success(), "exit {:?}: {}", o.status.code(), stderr(o));
    stdout(o)
}

#[test]
fn shadows_with_hulls_is_a_config_error() {
    let ws = Workspace::new();
    let o = ws.run(&args("moveplot", &GAPMINDER, &["--shadow"]));
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--shadow"));
    assert!(!ws.path("moveplot.svg").exists());
    ok(&ws.run(&args("moveplot", &GAPMINDER, &["--shadow", "--hulls=false"])));
}

#[test]
fn exit_codes_by_error_class() {
    let ws = Workspace::new();
    let code = |a: Vec<&str>| ws.run(&a).status.code();
    assert_eq!(code(args("moveplot", &GAPMINDER, &["--shadow-decay", "1.5", "--shadow", "--hulls=false"])), Some(2));
    assert_eq!(code(args("moveplot", &GAPMINDER, &["--facet-cols", "0"])), Some(2));
    assert_eq!(code(args("moveplot", &["--input", "gapminder.csv", "--time-var", "yr", "--group-var", "continent"], &[])), Some(2));
    assert_eq!(code(args("moveplot2", &CLIMATE, &["--reflect", "x"])), Some(2));
    assert_eq!(code(args("moveplot2", &CLIMATE, &["--align-time", "1955", "--reflect", "x"])), Some(2));
    assert_eq!(code(args("moveplot3", &CLIMATE, &["--align-on", "rows"])), Some(2));
    assert_eq!(code(vec!["moveplot", "--bogus"]), Some(2));

    fs::write(ws.path("bad.csv"), "t,g,a,b\n1,x,1,2\n2,x,abc,3\n").unwrap();
    let bad = ["--input", "bad.csv", "--time-var", "t", "--group-var", "g"];
    let o = ws.run(&args("moveplot", &bad, &[]));
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("abc"));

    assert_eq!(code(args("moveplot", &["--input", "missing.csv", "--time-var", "t", "--group-var", "g"], &[])), Some(5));
    assert_eq!(code(args("moveplot", &GAPMINDER, &["--out", "no/such/dir/x.svg"])), Some(5));
}

#[test]
fn moveplot_gapminder_facet_sheet() {
    let ws = Workspace::new();
    let out = ok(&ws.run(&args("moveplot", &GAPMINDER, &[])));
    let svg = fs::read_to_string(ws.path("moveplot.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains("2007"));
    assert!(out.contains("T=12") && out.contains("explained variance (global PCA)"));
    assert!(!out.contains("GPA"));
    assert!(out.trim_end().ends_with("wrote: moveplot.svg"));
}

#[test]
fn moveplot2_reflection_is_reported() {
    let ws = Workspace::new();
    let out = ok(&ws.run(&args(
        "moveplot2",
        &CLIMATE,
        &["--align-time", "1950", "--reflect", "x", "--format", "json", "--out", "r.json"],
    )));
    assert!(out.contains("reflection: x at 1950"));
    assert!(ws.path("r.json").exists());
}

#[test]
fn moveplot3_climate_with_evaluation() {
    let ws = Workspace::new();
    let out = ok(&ws.run(&args(
        "moveplot3",
        &CLIMATE,
        &["--emit-eval", "--charts", "--out", "aligned.svg"],
    )));
    for name in ["aligned.svg", "aligned_eval.csv", "aligned_eval.json", "aligned_eval_fit.svg", "aligned_eval_bias.svg"] {
        assert!(ws.path(name).exists(), "{name} missing");
        assert!(out.contains(&format!("wrote: {name}")), "{name} not reported");
    }
    assert!(out.contains("slices (8)"));
    assert!(out.contains("GPA: consensus target,") && out.contains("iterations"));
    assert!(out.trim_end().lines().last().unwrap().starts_with("RMSB"));
    let csv = fs::read_to_string(ws.path("aligned_eval.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn charts_need_emit_eval() {
    let ws = Workspace::new();
    assert_eq!(ws.run(&args("moveplot3", &CLIMATE, &["--charts"])).status.code(), Some(2));
}

#[test]
fn evaluate_writes_prefix_files_and_ends_with_the_table() {
    let ws = Workspace::new();
    let out = ok(&ws.run(&args("evaluate", &CLIMATE, &["--out", "run.v1", "--charts"])));
    for name in ["run.v1.csv", "run.v1.json", "run.v1_fit.svg", "run.v1_bias.svg"] {
        assert!(ws.path(name).exists(), "{name} missing");
    }
    let lines: Vec<&str> = out.trim_end().lines().collect();
    assert!(lines[lines.len() - 6].contains("Target vs. 1950"));
    assert!(lines.last().unwrap().starts_with("RMSB"));
}

#[test]
fn supplied_target_is_used() {
    let ws = Workspace::new();
    // The 2020 rows, without their year, as the target block.
    let csv = fixtures::climate_csv(3, 1);
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split_once(',').unwrap().1;
    let mut target = format!("{header}\n");
    for l in lines.filter_map(|l| l.strip_prefix("2020,")) {
        target.push_str(l);
        target.push('\n');
    }
    fs::write(ws.path("target.csv"), target).unwrap();
    let out = ok(&ws.run(&args("evaluate", &CLIMATE, &["--target", "target.csv"])));
    assert!(out.contains("alignment: supplied target"));
    let json = fs::read_to_string(ws.path("evaluation.json")).unwrap();
    assert!(json.contains("\"level\": \"2020\""));

    fs::write(ws.path("wrong.csv"), "Region,a,b\nSAH,1,2\nSAH,2,1\nSAH,0,0\n").unwrap();
    let o = ws.run(&args("evaluate", &CLIMATE, &["--target", "wrong.csv"]));
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("--target"));
}

fn read_tree(p: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    if p.is_dir() {
        let mut v: Vec<_> = fs::read_dir(p).unwrap().map(|e| e.unwrap().path()).collect();
        v.sort();
        v.into_iter().map(|f| (f.file_name().unwrap().into(), fs::read(&f).unwrap())).collect()
    } else {
        vec![(PathBuf::new(), fs::read(p).unwrap())]
    }
}

#[test]
fn runs_are_byte_identical() {
    let ws = Workspace::new();
    for (format, extra) in [("svg", "--move=false"), ("gif", "--move"), ("json", "--move")] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out = format!("run{run}.{format}");
            ok(&ws.run(&args(
                "moveplot3",
                &CLIMATE,
                &[extra, "--format", format, "--pause-frames", "2", "--transition-frames", "4", "--out", &out],
            )));
            outputs.push(read_tree(&ws.path(&out)));
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{format} differs");
    }
    let frames = read_tree(&ws.path("run0.svg"));
    assert_eq!(frames.len(), 8);
    assert_eq!(frames[0].0, PathBuf::from("frame_0000.svg"));
}

#[test]
fn failed_write_leaves_nothing_behind() {
    let ws = Workspace::new();
    fs::create_dir(ws.path("taken_eval.csv")).unwrap();
    let o = ws.run(&args("moveplot3", &CLIMATE, &["--emit-eval", "--out", "taken.svg"]));
    assert_eq!(o.status.code(), Some(5));
    assert!(!ws.path("taken.svg").exists());
}
