use crate::CliError;
use reweigh_core::DatasetName;
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};

/// Manifest compiled into the binary; `--manifest` replaces it.
pub const BUILTIN_MANIFEST: &str = include_str!("../datasets.manifest");

const MAX_DOWNLOAD: u64 = 256 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub dataset: String,
    pub file: String,
    pub sha256: String,
    pub url: String,
}

pub fn parse_manifest(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [dataset, file, sha256, url] = fields[..] else {
            return Err(CliError::Usage(format!(
                "manifest line {}: expected `dataset file sha256 url`",
                i + 1
            )));
        };
        if sha256.len() != 64 || !sha256.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(CliError::Usage(format!(
                "manifest line {}: bad sha256 `{sha256}`",
                i + 1
            )));
        }
        if file.contains('/') || file.contains('\\') || file.starts_with('.') {
            return Err(CliError::Usage(format!(
                "manifest line {}: bad file name `{file}`",
                i + 1
            )));
        }
        entries.push(Entry {
            dataset: dataset.to_string(),
            file: file.to_string(),
            sha256: sha256.to_ascii_lowercase(),
            url: url.to_string(),
        });
    }
    Ok(entries)
}

fn digest(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn download(url: &str) -> Result<Vec<u8>, CliError> {
    let mut response = ureq::get(url)
        .call()
        .map_err(|e| CliError::Runtime(format!("download of {url} failed: {e}")))?;
    response
        .body_mut()
        .with_config()
        .limit(MAX_DOWNLOAD)
        .read_to_vec()
        .map_err(|e| CliError::Runtime(format!("download of {url} failed: {e}")))
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o error on {}: {e}", path.display()))
}

/// Downloads every manifest file of `dataset` into `<out>/<dataset>/`,
/// skipping files already present with the pinned digest. Returns the
/// paths of the dataset's files.
pub fn fetch(dataset: DatasetName, out: &Path, manifest: &[Entry]) -> Result<Vec<PathBuf>, CliError> {
    let entries: Vec<&Entry> = manifest.iter().filter(|e| e.dataset == dataset.as_str()).collect();
    if entries.is_empty() {
        return Err(CliError::Usage(format!("manifest has no files for `{dataset}`")));
    }
    let dir = out.join(dataset.as_str());
    std::fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = dir.join(&entry.file);
        if let Ok(existing) = std::fs::read(&path) {
            if digest(&existing) == entry.sha256 {
                println!("{}: already present", path.display());
                paths.push(path);
                continue;
            }
        }
        let bytes = download(&entry.url)?;
        let actual = digest(&bytes);
        if actual != entry.sha256 {
            return Err(CliError::Data(format!(
                "checksum mismatch for {}: expected {}, got {actual}",
                entry.file, entry.sha256
            )));
        }
        let partial = dir.join(format!(".{}.partial", entry.file));
        let mut f = std::fs::File::create(&partial).map_err(|e| io_error(&partial, e))?;
        f.write_all(&bytes).map_err(|e| io_error(&partial, e))?;
        drop(f);
        std::fs::rename(&partial, &path).map_err(|e| io_error(&path, e))?;
        println!("{}: downloaded {} bytes, sha256 verified", path.display(), bytes.len());
        paths.push(path);
    }
    Ok(paths)
}
