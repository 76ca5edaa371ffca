use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or configuration; exit 2.
    Usage(String),
    /// Bad or missing input data; exit 1.
    Data { message: String, path: Option<PathBuf> },
}

impl CliError {
    pub fn data(message: impl Into<String>) -> Self {
        CliError::Data {
            message: message.into(),
            path: None,
        }
    }

    pub fn at(path: &Path, message: impl fmt::Display) -> Self {
        CliError::Data {
            message: format!("{}: {message}", path.display()),
            path: Some(path.to_path_buf()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": "usage", "message": m, "exit_code": 2}),
            CliError::Data { message, path } => json!({
                "error": "data",
                "message": message,
                "path": path.as_ref().map(|p| p.display().to_string()),
                "exit_code": 1,
            }),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Data { message, .. } => f.write_str(message),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Writes to stdout; a closed pipe (`revkit stats | head`) is not an error.
pub fn emit(s: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(s.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::data(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

pub fn require_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else if path.exists() {
        Err(CliError::at(path, "not a regular file"))
    } else {
        Err(CliError::at(path, "input file not found"))
    }
}

pub fn open(path: &Path) -> CliResult<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::at(path, e))
}

pub fn read_string(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::at(path, e))
}

pub fn sha256_file(path: &Path) -> CliResult<String> {
    let mut f = File::open(path).map_err(|e| CliError::at(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| CliError::at(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

/// Writes through a temp file in the target directory, renamed into place
/// only when `body` succeeds.
pub fn write_atomic<F>(path: &Path, body: F) -> CliResult<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> CliResult<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::at(dir, e))?;
    {
        let mut w = BufWriter::new(tmp.as_file_mut());
        body(&mut w)?;
        w.flush().map_err(|e| CliError::at(path, e))?;
    }
    tmp.persist(path).map_err(|e| CliError::at(path, e.error))?;
    Ok(())
}

pub fn write_string_atomic(path: &Path, s: &str) -> CliResult<()> {
    write_atomic(path, |w| w.write_all(s.as_bytes()).map_err(|e| CliError::at(path, e)))
}

/// Records what produced a run's outputs.
pub struct Manifest {
    pub command: &'static str,
    pub seed: u64,
    pub config_hash: String,
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    pub metadata: Value,
}

impl Manifest {
    pub fn to_json(&self) -> CliResult<Value> {
        let digest = |paths: &[PathBuf]| -> CliResult<Vec<Value>> {
            paths
                .iter()
                .filter(|p| p.is_file())
                .map(|p| Ok(json!({"path": p.display().to_string(), "sha256": sha256_file(p)?})))
                .collect()
        };
        Ok(json!({
            "tool": "revkit",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "seed": self.seed,
            "config_hash": self.config_hash,
            "inputs": digest(&self.inputs)?,
            "outputs": digest(&self.outputs)?,
            "metadata": self.metadata,
            "created": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }))
    }

    pub fn write(&self, path: &Path) -> CliResult<()> {
        let mut s = serde_json::to_string_pretty(&self.to_json()?).expect("serializable");
        s.push('\n');
        write_string_atomic(path, &s)
    }
}

pub fn default_manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

pub fn config_hash(command: &impl serde::Serialize, seed: u64) -> String {
    let v = json!({"command": command, "seed": seed});
    hex::encode(Sha256::digest(v.to_string().as_bytes()))
}
