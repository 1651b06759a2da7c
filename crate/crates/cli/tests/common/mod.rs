#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ngramdep::conll::write_conll;
use ngramdep::synthetic::{attachment_fixture, separable_treebank};

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Run {
    pub fn ok(self) -> Self {
        assert_eq!(self.code, 0, "stderr: {}", self.stderr);
        self
    }
}

impl From<Output> for Run {
    fn from(o: Output) -> Self {
        Run {
            code: o.status.code().expect("exit code"),
            stdout: String::from_utf8(o.stdout).unwrap(),
            stderr: String::from_utf8(o.stderr).unwrap(),
        }
    }
}

pub fn ngramdep<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_ngramdep")).args(args).output().unwrap().into()
}

pub struct Workspace {
    pub dir: tempfile::TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    /// Path as a string argument.
    pub fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    pub fn write(&self, name: &str, content: &str) -> String {
        let p = self.path(name);
        fs::write(&p, content).unwrap();
        p.display().to_string()
    }

    pub fn read(&self, name: &str) -> String {
        fs::read_to_string(self.path(name)).unwrap()
    }

    pub fn bytes(&self, name: &str) -> Vec<u8> {
        fs::read(self.path(name)).unwrap()
    }

    /// Attachment task files: train.conll, test.conll, web-{0,1,2}.txt and
    /// syn-{0,1,2}.txt, the corpora split round-robin into three shards.
    pub fn attachment(&self, seed: u64) {
        let f = attachment_fixture(seed);
        self.write("train.conll", &write_conll(&f.train, None).unwrap());
        self.write("test.conll", &write_conll(&f.test, None).unwrap());
        for (prefix, lines) in [("web", &f.surface_lines), ("syn", &f.syntactic_lines)] {
            for shard in 0..3 {
                let part: Vec<&str> = lines.iter().skip(shard).step_by(3).map(String::as_str).collect();
                self.write(&format!("{prefix}-{shard}.txt"), &(part.join("\n") + "\n"));
            }
        }
    }

    pub fn separable(&self, name: &str, seed: u64, count: usize) -> String {
        self.write(name, &write_conll(&separable_treebank(seed, count), None).unwrap())
    }
}

pub fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .display()
        .to_string()
}

/// Table entry lines, without the metadata header.
pub fn entries(table: &str) -> Vec<&str> {
    table.lines().filter(|l| !l.starts_with("#meta")).collect()
}
