#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bodypath::HeightMap;

pub fn bodypath(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bodypath"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

pub fn read_map(path: &Path) -> HeightMap<f64> {
    HeightMap::from_json_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}
