//! Text export of composed embeddings.
//!
//! The TSV form is a directory holding `__central__.tsv` (central input
//! vectors in global order), one `<slice>.tsv` per slice (composed input
//! vectors in the slice's rank order) and a `manifest.json` with the
//! dimension and slice order. Every TSV line is `word<TAB>f1<TAB>...<TAB>fd`.
//! Values are printed in shortest round-trip form, so re-reading an export
//! reproduces the `f32` vectors exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::load_model;
use crate::corpus::{GlobalIndex, SliceId};
use crate::error::{Error, Result};
use crate::eval::{ComposedEmbeddings, SliceSpace};

pub const CENTRAL_SECTION: &str = "__central__";
const MANIFEST: &str = "manifest.json";
const TSV_FORMAT: &str = "mw2v-tsv";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Tsv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(ExportFormat::Tsv),
            "json" => Ok(ExportFormat::Json),
            _ => Err(Error::InvalidInput(format!("unknown export format {s:?}"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: String,
    dim: usize,
    slices: Vec<SliceId>,
}

#[derive(Serialize, Deserialize)]
struct JsonSlice {
    id: SliceId,
    words: Vec<String>,
    vectors: Vec<Vec<f32>>,
}

#[derive(Serialize, Deserialize)]
struct JsonExport {
    dim: usize,
    words: Vec<String>,
    central: Vec<Vec<f32>>,
    slices: Vec<JsonSlice>,
}

fn file_name(id: &SliceId) -> Result<String> {
    let s = id.as_str();
    if s == CENTRAL_SECTION || s.starts_with('.') || s.contains(['/', '\\']) {
        return Err(Error::InvalidInput(format!(
            "slice id {s:?} cannot be used as an export file name"
        )));
    }
    Ok(format!("{s}.tsv"))
}

fn write_rows<'a>(rows: impl Iterator<Item = (&'a str, &'a [f32])>) -> String {
    let mut out = String::new();
    for (word, v) in rows {
        out.push_str(word);
        for x in v {
            write!(out, "\t{x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_tsv_dir(emb: &ComposedEmbeddings, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
    let write = |name: &str, content: String| {
        let path = dir.join(name);
        fs::write(&path, content).map_err(|e| Error::file(path, e))
    };
    let names = emb
        .slices()
        .iter()
        .map(|s| file_name(s.id()))
        .collect::<Result<Vec<_>>>()?;

    write(
        &format!("{CENTRAL_SECTION}.tsv"),
        write_rows(
            (0..emb.words().len()).map(|g| (emb.words()[g].as_str(), emb.central(GlobalIndex(g as u32)))),
        ),
    )?;
    for (pos, (space, name)) in emb.slices().iter().zip(&names).enumerate() {
        write(
            name,
            write_rows(
                space
                    .members()
                    .iter()
                    .map(|&g| (emb.word(g), emb.vector(pos, g).unwrap())),
            ),
        )?;
    }
    let manifest = Manifest {
        format: TSV_FORMAT.into(),
        dim: emb.dim(),
        slices: emb.slices().iter().map(|s| s.id().clone()).collect(),
    };
    write(MANIFEST, serde_json::to_string_pretty(&manifest)? + "\n")
}

/// `(word, vector)` lines of one TSV file.
type Rows = Vec<(String, Vec<f32>)>;

fn read_rows(path: &Path, dim: usize) -> Result<Rows> {
    let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let bad = |detail: &str| {
            Error::format("embedding export", format!("{}:{}: {detail}", path.display(), lineno + 1))
        };
        let mut fields = line.split('\t');
        let word = fields.next().filter(|w| !w.is_empty()).ok_or_else(|| bad("missing word"))?;
        let values = fields
            .map(|f| f.parse::<f32>().map_err(|_| bad("bad number")))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(bad(&format!("expected {dim} columns, found {}", values.len())));
        }
        rows.push((word.to_owned(), values));
    }
    Ok(rows)
}

fn assemble(
    dim: usize,
    central: Rows,
    slices: Vec<(SliceId, Rows)>,
) -> Result<ComposedEmbeddings> {
    let words: Vec<String> = central.iter().map(|(w, _)| w.clone()).collect();
    let index: std::collections::HashMap<&str, u32> =
        words.iter().enumerate().map(|(i, w)| (w.as_str(), i as u32)).collect();
    let central_flat = central.into_iter().flat_map(|(_, v)| v).collect();
    let spaces = slices
        .into_iter()
        .map(|(id, rows)| {
            let mut members = Vec::with_capacity(rows.len());
            let mut vectors = Vec::with_capacity(rows.len() * dim);
            for (word, v) in rows {
                let g = index.get(word.as_str()).ok_or_else(|| {
                    Error::format("embedding export", format!("slice {id}: word {word:?} missing from central section"))
                })?;
                members.push(GlobalIndex(*g));
                vectors.extend(v);
            }
            SliceSpace::new(id, members, vectors, dim)
        })
        .collect::<Result<Vec<_>>>()?;
    ComposedEmbeddings::new(dim, words, central_flat, spaces)
}

pub fn read_tsv_dir(dir: impl AsRef<Path>) -> Result<ComposedEmbeddings> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST);
    let manifest: Manifest = serde_json::from_str(
        &fs::read_to_string(&manifest_path).map_err(|e| Error::file(&manifest_path, e))?,
    )?;
    if manifest.format != TSV_FORMAT {
        return Err(Error::format("embedding export", format!("unknown format {:?}", manifest.format)));
    }
    let central = read_rows(&dir.join(format!("{CENTRAL_SECTION}.tsv")), manifest.dim)?;
    let slices = manifest
        .slices
        .into_iter()
        .map(|id| {
            let rows = read_rows(&dir.join(file_name(&id)?), manifest.dim)?;
            Ok((id, rows))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(manifest.dim, central, slices)
}

pub fn write_json(emb: &ComposedEmbeddings, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let export = JsonExport {
        dim: emb.dim(),
        words: emb.words().to_vec(),
        central: (0..emb.words().len())
            .map(|g| emb.central(GlobalIndex(g as u32)).to_vec())
            .collect(),
        slices: emb
            .slices()
            .iter()
            .enumerate()
            .map(|(pos, s)| JsonSlice {
                id: s.id().clone(),
                words: s.members().iter().map(|&g| emb.word(g).to_owned()).collect(),
                vectors: s.members().iter().map(|&g| emb.vector(pos, g).unwrap().to_vec()).collect(),
            })
            .collect(),
    };
    fs::write(path, serde_json::to_vec(&export)?).map_err(|e| Error::file(path, e))
}

pub fn read_json(path: impl AsRef<Path>) -> Result<ComposedEmbeddings> {
    let path = path.as_ref();
    let text = fs::read(path).map_err(|e| Error::file(path, e))?;
    let export: JsonExport = serde_json::from_slice(&text)?;
    if export.central.len() != export.words.len() {
        return Err(Error::format("embedding export", "central rows do not match words"));
    }
    let check = |v: &Vec<f32>| {
        if v.len() == export.dim {
            Ok(())
        } else {
            Err(Error::format("embedding export", "vector of wrong dimension"))
        }
    };
    export.central.iter().try_for_each(check)?;
    let central = export.words.into_iter().zip(export.central).collect();
    let slices = export
        .slices
        .into_iter()
        .map(|s| {
            s.vectors.iter().try_for_each(check)?;
            if s.words.len() != s.vectors.len() {
                return Err(Error::format("embedding export", "slice rows do not match words"));
            }
            Ok((s.id, s.words.into_iter().zip(s.vectors).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    assemble(export.dim, central, slices)
}

/// Opens embeddings from a binary model file, a TSV export directory or a
/// JSON export (`.json`).
pub fn read_embeddings(path: impl AsRef<Path>) -> Result<ComposedEmbeddings> {
    let path = path.as_ref();
    if path.is_dir() {
        read_tsv_dir(path)
    } else if path.extension().is_some_and(|e| e == "json") {
        read_json(path)
    } else {
        Ok(ComposedEmbeddings::from_model(&load_model(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{train, TrainingConfig};
    use crate::synthetic;

    fn embeddings() -> ComposedEmbeddings {
        let corpora = synthetic::partial_vocab_slices(3, 600, 9);
        let config = TrainingConfig {
            dim: 5,
            epochs: 1,
            batch_size: 16,
            subsample: None,
            ..Default::default()
        };
        ComposedEmbeddings::from_model(&train(&corpora, &config).unwrap().0)
    }

    #[test]
    fn tsv_round_trip_is_exact() {
        let emb = embeddings();
        let dir = tempfile::tempdir().unwrap();
        write_tsv_dir(&emb, dir.path()).unwrap();
        assert_eq!(read_tsv_dir(dir.path()).unwrap(), emb);
        assert_eq!(read_embeddings(dir.path()).unwrap(), emb);
    }

    #[test]
    fn tsv_shape() {
        let emb = embeddings();
        let dir = tempfile::tempdir().unwrap();
        write_tsv_dir(&emb, dir.path()).unwrap();
        let mut lines = 0;
        for entry in fs::read_dir(dir.path()).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "tsv") {
                for line in fs::read_to_string(&path).unwrap().lines() {
                    assert_eq!(line.split('\t').count(), 1 + emb.dim());
                    lines += 1;
                }
            }
        }
        let expected: usize = emb.slices().iter().map(|s| s.members().len()).sum::<usize>() + emb.words().len();
        assert_eq!(lines, expected);
    }

    #[test]
    fn json_round_trip_is_exact() {
        let emb = embeddings();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.json");
        write_json(&emb, &path).unwrap();
        assert_eq!(read_embeddings(&path).unwrap(), emb);
    }

    #[test]
    fn unsafe_slice_names_are_rejected() {
        assert!(file_name(&SliceId::new("a/b").unwrap()).is_err());
        assert!(file_name(&SliceId::new(CENTRAL_SECTION).unwrap()).is_err());
        assert_eq!(file_name(&SliceId::new("nyt-1990").unwrap()).unwrap(), "nyt-1990.tsv");
    }
}
