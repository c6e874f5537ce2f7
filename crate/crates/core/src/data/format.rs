//! On-disk dataset format.
//!
//! A dataset directory holds a JSON manifest plus four files:
//!
//! * `edges.txt`: one `u v` pair per line, 0-indexed. Blank lines and lines
//!   starting with `#` are ignored.
//! * `features.bin`: magic `BGNF`, `u32` N, `u32` d (little-endian), then
//!   N·d row-major `f32` values.
//! * `labels.txt`: one integer class per line.
//! * `masks.txt`: one line per node holding `t` (train), `v` (validation),
//!   `s` (test) or `-` (unassigned).

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bitlinalg::DenseMatrix;
use crate::error::{DataError, Error};
use crate::graph::{AttributedGraph, Masks};

pub const FEATURES_MAGIC: &[u8; 4] = b"BGNF";

/// Dataset description. Relative paths resolve against the manifest's
/// directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub edges: PathBuf,
    pub features: PathBuf,
    pub labels: PathBuf,
    pub masks: PathBuf,
    pub num_nodes: usize,
    pub feature_dim: usize,
    pub num_classes: usize,
}

impl DatasetManifest {
    /// Manifest with the default file names.
    pub fn standard(
        name: impl Into<String>,
        num_nodes: usize,
        feature_dim: usize,
        num_classes: usize,
    ) -> Self {
        Self {
            name: name.into(),
            edges: "edges.txt".into(),
            features: "features.bin".into(),
            labels: "labels.txt".into(),
            masks: "masks.txt".into(),
            num_nodes,
            feature_dim,
            num_classes,
        }
    }

    pub fn read(path: &Path) -> Result<Self, DataError> {
        let text = read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| DataError::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            msg: e.to_string(),
        })
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn open(path: &Path) -> Result<File, DataError> {
    File::open(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            DataError::MissingFile(path.to_path_buf())
        } else {
            DataError::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn read_to_string(path: &Path) -> Result<String, DataError> {
    let mut s = String::new();
    open(path)?.read_to_string(&mut s).map_err(io_err(path))?;
    Ok(s)
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> DataError {
    DataError::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

/// Loads the dataset described by the manifest at `manifest_path`.
pub fn load_dataset(manifest_path: &Path) -> Result<AttributedGraph, DataError> {
    let manifest = DatasetManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    load_with_manifest(&manifest, base)
}

pub fn load_with_manifest(m: &DatasetManifest, base: &Path) -> Result<AttributedGraph, DataError> {
    let n = m.num_nodes;
    let features = read_features(&base.join(&m.features))?;
    check_dim("feature rows", n, features.rows())?;
    check_dim("feature dimension", m.feature_dim, features.cols())?;

    let labels = read_labels(&base.join(&m.labels))?;
    check_dim("labels", n, labels.len())?;
    if let Some((node, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= m.num_classes) {
        return Err(DataError::LabelOutOfRange {
            node,
            label,
            classes: m.num_classes,
        });
    }

    let masks = read_masks(&base.join(&m.masks))?;
    check_dim("mask entries", n, masks.len())?;

    let edges = read_edges(&base.join(&m.edges))?;
    if let Some(&(u, v)) = edges.iter().find(|&&(u, v)| u >= n || v >= n) {
        return Err(DataError::EdgeOutOfRange { u, v, nodes: n });
    }
    Ok(AttributedGraph::new(
        features,
        edges,
        labels,
        m.num_classes,
        masks,
    )?)
}

fn check_dim(what: &str, declared: usize, found: usize) -> Result<(), DataError> {
    if declared == found {
        Ok(())
    } else {
        Err(DataError::DimensionMismatch {
            what: what.to_string(),
            declared,
            found,
        })
    }
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>, DataError> {
    let reader = BufReader::new(open(path)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        let t = line.trim();
        if !t.is_empty() && !t.starts_with('#') {
            out.push((i + 1, t.to_string()));
        }
    }
    Ok(out)
}

pub fn read_edges(path: &Path) -> Result<Vec<(usize, usize)>, DataError> {
    data_lines(path)?
        .into_iter()
        .map(|(ln, line)| {
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize, DataError> {
                let tok = it
                    .next()
                    .ok_or_else(|| parse_err(path, ln, "expected two node ids"))?;
                tok.parse()
                    .map_err(|_| parse_err(path, ln, format!("bad node id {tok:?}")))
            };
            let (u, v) = (next()?, next()?);
            if it.next().is_some() {
                return Err(parse_err(path, ln, "trailing tokens after edge"));
            }
            Ok((u, v))
        })
        .collect()
}

pub fn read_labels(path: &Path) -> Result<Vec<usize>, DataError> {
    data_lines(path)?
        .into_iter()
        .map(|(ln, line)| {
            line.parse()
                .map_err(|_| parse_err(path, ln, format!("bad label {line:?}")))
        })
        .collect()
}

pub fn read_masks(path: &Path) -> Result<Masks, DataError> {
    let lines = data_lines(path)?;
    let n = lines.len();
    let (mut train, mut val, mut test) = (vec![false; n], vec![false; n], vec![false; n]);
    for (node, (ln, entry)) in lines.into_iter().enumerate() {
        for c in entry.chars() {
            let slot = match c {
                't' => &mut train[node],
                'v' => &mut val[node],
                's' => &mut test[node],
                '-' => continue,
                other => {
                    return Err(parse_err(
                        path,
                        ln,
                        format!("unknown split marker {other:?}"),
                    ))
                }
            };
            *slot = true;
        }
        if entry.contains('-') && entry.len() > 1 {
            return Err(parse_err(path, ln, "'-' cannot be combined with a split"));
        }
        if [train[node], val[node], test[node]]
            .iter()
            .filter(|&&b| b)
            .count()
            > 1
        {
            return Err(DataError::OverlappingMasks { node });
        }
    }
    Ok(Masks::new(train, val, test)?)
}

pub fn read_features(path: &Path) -> Result<DenseMatrix, DataError> {
    let mut r = BufReader::new(open(path)?);
    let (rows, cols) = read_f32_header(&mut r, path, FEATURES_MAGIC)?;
    let data = read_f32_body(&mut r, path, rows, cols)?;
    DenseMatrix::from_vec(rows, cols, data).map_err(DataError::from)
}

pub(crate) fn read_f32_header(
    r: &mut impl Read,
    path: &Path,
    magic: &[u8; 4],
) -> Result<(usize, usize), DataError> {
    let mut head = [0u8; 12];
    r.read_exact(&mut head).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => parse_err(path, 0, "truncated header"),
        _ => io_err(path)(e),
    })?;
    if &head[..4] != magic {
        return Err(DataError::BadMagic {
            path: path.to_path_buf(),
            expected: String::from_utf8_lossy(magic).into_owned(),
        });
    }
    let rows = u32::from_le_bytes(head[4..8].try_into().expect("4 bytes")) as usize;
    let cols = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    Ok((rows, cols))
}

pub(crate) fn read_f32_body(
    r: &mut impl Read,
    path: &Path,
    rows: usize,
    cols: usize,
) -> Result<Vec<f64>, DataError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(io_err(path))?;
    let expected = rows * cols * 4;
    if bytes.len() != expected {
        return Err(DataError::DimensionMismatch {
            what: format!("{} payload bytes", path.display()),
            declared: expected,
            found: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().expect("4 bytes")) as f64)
        .collect())
}

pub(crate) fn write_f32_matrix(
    path: &Path,
    magic: &[u8; 4],
    m: &DenseMatrix,
) -> Result<(), DataError> {
    let too_big = |d: usize| u32::try_from(d).is_err();
    if too_big(m.rows()) || too_big(m.cols()) {
        return Err(Error::invalid("matrix dimensions exceed u32").into());
    }
    let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(io_err(path));
    put(magic)?;
    put(&(m.rows() as u32).to_le_bytes())?;
    put(&(m.cols() as u32).to_le_bytes())?;
    for &x in m.as_slice() {
        put(&(x as f32).to_le_bytes())?;
    }
    w.flush().map_err(io_err(path))
}

/// Writes `graph` into `dir` with a `manifest.json` and returns the manifest
/// path.
///
/// Features are stored as `f32`; a feature value that does not survive that
/// narrowing unchanged is rejected so that loading gives back the same graph.
pub fn save_dataset(graph: &AttributedGraph, name: &str, dir: &Path) -> Result<PathBuf, DataError> {
    if let Some(pos) = graph
        .features()
        .as_slice()
        .iter()
        .position(|&x| (x as f32) as f64 != x)
    {
        let (r, c) = (pos / graph.feature_dim(), pos % graph.feature_dim());
        return Err(
            Error::invalid(format!("feature ({r}, {c}) is not representable as f32")).into(),
        );
    }
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let m = DatasetManifest::standard(
        name,
        graph.num_nodes(),
        graph.feature_dim(),
        graph.num_classes(),
    );

    write_f32_matrix(&dir.join(&m.features), FEATURES_MAGIC, graph.features())?;

    let write_lines =
        |file: &Path, lines: &mut dyn Iterator<Item = String>| -> Result<(), DataError> {
            let path = dir.join(file);
            let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
            for line in lines {
                writeln!(w, "{line}").map_err(io_err(&path))?;
            }
            w.flush().map_err(io_err(&path))
        };
    write_lines(
        &m.edges,
        &mut graph.edges().iter().map(|(u, v)| format!("{u} {v}")),
    )?;
    write_lines(&m.labels, &mut graph.labels().iter().map(|l| l.to_string()))?;
    let masks = graph.masks();
    write_lines(
        &m.masks,
        &mut (0..graph.num_nodes()).map(|i| {
            let c = if masks.train[i] {
                "t"
            } else if masks.val[i] {
                "v"
            } else if masks.test[i] {
                "s"
            } else {
                "-"
            };
            c.to_string()
        }),
    )?;

    let manifest_path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&m).expect("manifest serializes");
    fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))?;
    Ok(manifest_path)
}
