//! Text formats: edgelists, label files and embedding CSV.
//!
//! Edgelist lines are `u v` or `u v w`, whitespace separated; lines starting
//! with `#` and blank lines are skipped. Label files hold one integer per line;
//! zero or negative means unknown. All writers go through [`atomic_write`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::encoder::Embedding;
use crate::error::{GeeError, Result};
use crate::graph::{Edge, EdgeList, LabelVector};

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Input ids start at 1 and are shifted down on load.
    pub one_based: bool,
    pub directed: bool,
}

pub fn load_edgelist(path: impl AsRef<Path>, opts: LoadOptions) -> Result<EdgeList> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| GeeError::io(path, e))?;
    parse_edgelist(file, path, opts)
}

pub fn parse_edgelist(reader: impl Read, origin: &Path, opts: LoadOptions) -> Result<EdgeList> {
    let shift = i64::from(opts.one_based);
    let mut edges = Vec::new();
    let mut max_id: Option<u32> = None;
    let reader = BufReader::new(reader);
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| GeeError::io(origin, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let perr = |message: String| GeeError::Parse {
            path: origin.to_path_buf(),
            line: lineno,
            message,
        };
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != 2 && fields.len() != 3 {
            return Err(perr(format!("expected 2 or 3 fields, found {}", fields.len())));
        }
        let mut ids = [0u32; 2];
        for (slot, raw) in ids.iter_mut().zip(&fields[..2]) {
            let id: i64 = raw
                .parse()
                .map_err(|_| perr(format!("invalid vertex id {raw:?}")))?;
            let id = id - shift;
            if id < 0 {
                return Err(GeeError::Domain(format!(
                    "{}:{lineno}: vertex id {raw} is negative after index shift",
                    origin.display()
                )));
            }
            *slot = u32::try_from(id)
                .map_err(|_| perr(format!("vertex id {raw} exceeds the u32 id space")))?;
        }
        let w = match fields.get(2) {
            Some(raw) => {
                let w: f64 = raw.parse().map_err(|_| perr(format!("invalid weight {raw:?}")))?;
                if !w.is_finite() {
                    return Err(perr(format!("non-finite weight {raw:?}")));
                }
                w
            }
            None => 1.0,
        };
        let hi = ids[0].max(ids[1]);
        max_id = Some(max_id.map_or(hi, |m| m.max(hi)));
        edges.push(Edge::new(ids[0], ids[1], w));
    }
    let n = max_id.map_or(0, |m| m as usize + 1);
    EdgeList::new(n, edges, opts.directed)
}

/// Writes `u v w` lines with shortest round-trip weight formatting.
pub fn write_edgelist(path: impl AsRef<Path>, edges: &EdgeList) -> Result<()> {
    atomic_write(path.as_ref(), |out| {
        for e in edges.edges() {
            writeln!(out, "{} {} {}", e.u, e.v, e.w)?;
        }
        Ok(())
    })
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<LabelVector> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| GeeError::io(path, e))?;
    let mut raw = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| GeeError::io(path, e))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let y: i64 = t.parse().map_err(|_| GeeError::Parse {
            path: path.to_path_buf(),
            line: idx + 1,
            message: format!("invalid label {t:?}"),
        })?;
        raw.push(y);
    }
    LabelVector::from_signed(&raw)
}

pub fn write_labels(path: impl AsRef<Path>, labels: &[u32]) -> Result<()> {
    atomic_write(path.as_ref(), |out| {
        for y in labels {
            writeln!(out, "{y}")?;
        }
        Ok(())
    })
}

/// One line per vertex, each value written with shortest round-trip formatting.
pub fn write_vectors(path: impl AsRef<Path>, rows: &[Vec<f64>]) -> Result<()> {
    atomic_write(path.as_ref(), |out| {
        for row in rows {
            let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(out, "{}", line.join(" "))?;
        }
        Ok(())
    })
}

/// Embedding CSV: header `vertex,z1,..,zK`, one row per vertex.
///
/// Values use Rust's shortest round-trip representation, which never needs
/// more than 17 significant digits and parses back to the identical `f64`.
pub fn write_embedding_csv(out: &mut impl Write, z: &Embedding) -> std::io::Result<()> {
    let header: Vec<String> = (1..=z.k()).map(|k| format!("z{k}")).collect();
    writeln!(out, "vertex,{}", header.join(","))?;
    for i in 0..z.n() {
        write!(out, "{i}")?;
        for x in z.row(i) {
            write!(out, ",{x}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn save_embedding_csv(path: impl AsRef<Path>, z: &Embedding) -> Result<()> {
    atomic_write(path.as_ref(), |out| write_embedding_csv(out, z))
}

/// Parses CSV produced by [`write_embedding_csv`] back into rows.
pub fn read_embedding_csv(reader: impl Read) -> Result<Vec<Vec<f64>>> {
    let origin = Path::new("<embedding>");
    let mut rows = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate().skip(1) {
        let line = line.map_err(|e| GeeError::io(origin, e))?;
        let row = line
            .split(',')
            .skip(1)
            .map(|f| f.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| GeeError::Parse {
                path: origin.into(),
                line: idx + 1,
                message: e.to_string(),
            })?;
        rows.push(row);
    }
    Ok(rows)
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn atomic_write<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<&mut File>) -> std::io::Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| GeeError::io(path, e))?;
    {
        let mut out = BufWriter::new(tmp.as_file_mut());
        body(&mut out).and_then(|_| out.flush()).map_err(|e| GeeError::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| GeeError::io(path, e.error))?;
    Ok(())
}
