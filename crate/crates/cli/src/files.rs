use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use sqeval::campaign::Stimulus;
use sqeval::screening::{read_votes, Vote};

pub fn require_file(path: &Path) -> Result<()> {
    if !path.is_file() {
        bail!("{} does not exist or is not a file", path.display());
    }
    Ok(())
}

pub fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn print_json<T: Serialize + ?Sized>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

pub fn load_votes(path: &Path) -> Result<Vec<Vote>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_votes(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

/// clip id -> condition id, from a JSON list of stimuli.
pub fn load_clip_map(path: &Path) -> Result<HashMap<String, String>> {
    let clips: Vec<Stimulus> = read_json(path)?;
    Ok(clips.into_iter().map(|c| (c.clip_id, c.condition_id)).collect())
}
