//! Running the `echodbg` binary as real processes.
#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::PathBuf;
use std::process::{Child, ChildStdout, Command, Output, Stdio};

pub fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_echodbg")
}

pub fn fixture(name: &str) -> PathBuf {
    echo_core::testkit::fixtures_dir().join(name)
}

/// A child process killed on drop.
pub struct Proc {
    pub child: Child,
    pub lines: BufReader<ChildStdout>,
}

impl Proc {
    /// Next stdout line, without the trailing newline.
    pub fn line(&mut self) -> String {
        let mut s = String::new();
        self.lines.read_line(&mut s).expect("child stdout");
        s.trim_end().to_string()
    }
}

impl Drop for Proc {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn spawn(args: &[&str]) -> Proc {
    let mut child = Command::new(exe())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::inherit())
        .spawn()
        .expect("spawn echodbg");
    let lines = BufReader::new(child.stdout.take().unwrap());
    Proc { child, lines }
}

/// `echodbg serve` on a free port; returns the process and its URL.
pub fn serve(program: &str, entry: &str) -> (Proc, String) {
    serve_with(program, entry, &[])
}

pub fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().expect("run echodbg")
}

/// `echodbg serve` with extra flags, e.g. `--budget`.
pub fn serve_with(program: &str, entry: &str, extra: &[&str]) -> (Proc, String) {
    let path = fixture(program);
    let mut args = vec!["serve", path.to_str().unwrap(), "--entry", entry, "--port", "0"];
    args.extend_from_slice(extra);
    let mut p = spawn(&args);
    let line = p.line();
    let url = line
        .strip_prefix("listening on ")
        .unwrap_or_else(|| panic!("unexpected: {line}"))
        .to_string();
    (p, url)
}
