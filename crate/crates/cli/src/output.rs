use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use edscat::model::io::{self, Document};
use num_complex::Complex64 as C64;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

/// Files written to temporaries and renamed into place only on success.
#[derive(Default)]
pub struct Staged {
    pending: Vec<(PathBuf, PathBuf)>,
}

fn temp_path(target: &Path) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    target.with_file_name(format!(".{name}.{}.tmp", std::process::id()))
}

impl Staged {
    pub fn write(&mut self, target: &Path, contents: &str) -> std::io::Result<()> {
        let tmp = temp_path(target);
        let mut f = fs::File::create(&tmp)?;
        self.pending.push((tmp, target.to_path_buf()));
        f.write_all(contents.as_bytes())?;
        f.sync_all()
    }

    pub fn document(&mut self, target: &Path, doc: &Document) -> std::io::Result<()> {
        self.write(target, &io::to_string(doc))
    }

    pub fn commit(mut self) -> std::io::Result<()> {
        for (tmp, target) in std::mem::take(&mut self.pending) {
            fs::rename(&tmp, &target)?;
        }
        Ok(())
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (tmp, _) in &self.pending {
            let _ = fs::remove_file(tmp);
        }
    }
}

pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Flat key-value run report.
pub struct Report {
    fields: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut fields = Map::new();
        fields.insert("command".into(), command.into());
        Report { fields }
    }

    /// Panics on a repeated key: every entry appears once.
    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        let prev = self.fields.insert(key.to_string(), value.into());
        assert!(prev.is_none(), "report key {key} written twice");
    }

    pub fn number(&mut self, key: &str, x: f64) {
        let v = serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null);
        self.set(key, v);
    }

    pub fn complex(&mut self, key: &str, z: C64) {
        self.number(&format!("{key}_re"), z.re);
        self.number(&format!("{key}_im"), z.im);
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.fields.clone())).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Column text: abscissa, real part, imaginary part.
pub fn columns(xs: &[f64], values: &[C64]) -> String {
    let mut s = String::from("# x re im\n");
    for (x, z) in xs.iter().zip(values) {
        s.push_str(&format!("{x:e} {:e} {:e}\n", z.re, z.im));
    }
    s
}

pub fn plot_path(prefix: &Path, quantity: &str) -> PathBuf {
    let name = prefix.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    prefix.with_file_name(format!("{name}_{quantity}.dat"))
}
