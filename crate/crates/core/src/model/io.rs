//! Binary model container.
//!
//! Layout, little-endian throughout:
//!
//! ```text
//! "MW2V"                      magic
//! u32                         format version
//! u32 len, [u8; len]          training configuration as JSON
//! u32 |V|                     global vocabulary:
//!   { u32 len, utf-8 word, u64 total count } * |V|
//! u32 S                       slice vocabularies, sorted by id:
//!   { u32 len, utf-8 id, u32 |V_s|, { u32 global index, u64 count } * |V_s| } * S
//! u32 d
//! f32 * |V| * d               central input
//! f32 * |V| * d               central output
//! { f32 * |V| * d input drift, f32 * |V| * d output drift } * S
//! u32                         CRC-32 of every preceding byte
//! ```

use std::fs;
use std::path::Path;

use super::{Block, EmbeddingTables, Matrix, TrainedModel, TrainingConfig};
use crate::corpus::{SliceId, SliceVocabulary, VocabularyIndex};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"MW2V";
pub const FORMAT_VERSION: u32 = 1;

/// Serializes `model` to bytes.
pub fn write_model(model: &TrainedModel) -> Result<Vec<u8>> {
    let TrainedModel {
        config,
        vocab,
        tables,
    } = model;
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    put_u32(&mut out, FORMAT_VERSION);
    put_bytes(&mut out, &serde_json::to_vec(config)?)?;

    put_len(&mut out, vocab.len())?;
    for (g, word) in vocab.words().iter().enumerate() {
        put_bytes(&mut out, word.as_bytes())?;
        out.extend_from_slice(&vocab.total_count(crate::corpus::GlobalIndex(g as u32)).to_le_bytes());
    }
    put_len(&mut out, vocab.num_slices())?;
    for (pos, slice) in vocab.slices().iter().enumerate() {
        put_bytes(&mut out, slice.slice().as_str().as_bytes())?;
        put_len(&mut out, slice.len())?;
        for (global, count) in vocab.members(pos).iter().zip(slice.counts()) {
            put_u32(&mut out, global.0);
            out.extend_from_slice(&count.to_le_bytes());
        }
    }

    put_len(&mut out, tables.dim())?;
    for b in 0..tables.num_blocks() {
        for v in tables.block(Block::from_ordinal(b)).as_slice() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let crc = crc32fast::hash(&out);
    put_u32(&mut out, crc);
    Ok(out)
}

pub fn save_model(model: &TrainedModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_model(model)?;
    fs::write(path, bytes).map_err(|e| Error::file(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<TrainedModel> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::file(path, e))?;
    read_model(&bytes)
}

/// Parses a model container, checking magic, version and checksum.
pub fn read_model(bytes: &[u8]) -> Result<TrainedModel> {
    if bytes.len() < 8 {
        return Err(if bytes.len() >= 4 && &bytes[..4] != MAGIC {
            Error::BadMagic
        } else {
            Error::Truncated
        });
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::BadMagic);
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    if bytes.len() < 12 {
        return Err(Error::Truncated);
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(trailer.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(Error::Checksum { stored, computed });
    }

    let mut r = Reader { buf: body, pos: 8 };
    let config: TrainingConfig = serde_json::from_slice(r.bytes()?)?;

    let n = r.u32()? as usize;
    let mut ranked = Vec::with_capacity(n.min(body.len()));
    for _ in 0..n {
        let word = r.string()?;
        let total = r.u64()?;
        ranked.push((word, total));
    }
    let num_slices = r.u32()? as usize;
    let mut slices = Vec::with_capacity(num_slices.min(body.len()));
    for _ in 0..num_slices {
        let id = SliceId::new(r.string()?)?;
        let len = r.u32()? as usize;
        let mut entries = Vec::with_capacity(len.min(body.len()));
        for _ in 0..len {
            let g = r.u32()? as usize;
            let count = r.u64()?;
            let word = ranked
                .get(g)
                .ok_or_else(|| Error::format("model vocabulary", format!("global index {g} out of range")))?
                .0
                .clone();
            entries.push((word, count));
        }
        slices.push(SliceVocabulary::from_ranked(id, entries)?);
    }
    let vocab = VocabularyIndex::from_parts(ranked, slices)?;

    let dim = r.u32()? as usize;
    if dim != config.dim {
        return Err(Error::format(
            "model file",
            format!("table dimension {dim} disagrees with config dimension {}", config.dim),
        ));
    }
    let mut tables = EmbeddingTables::<f32>::zeros(&vocab, dim);
    for b in 0..tables.num_blocks() {
        let block = Block::from_ordinal(b);
        let len = vocab.len() * dim;
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f32::from_le_bytes(r.take(4)?.try_into().unwrap()));
        }
        *tables.block_mut(block) = Matrix::from_vec(vocab.len(), dim, data)?;
    }
    if r.pos != body.len() {
        return Err(Error::format("model file", "trailing bytes after tables"));
    }
    Ok(TrainedModel {
        config,
        vocab,
        tables,
    })
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_len(out: &mut Vec<u8>, n: usize) -> Result<()> {
    let n = u32::try_from(n).map_err(|_| Error::InvalidInput("length exceeds u32".into()))?;
    put_u32(out, n);
    Ok(())
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) -> Result<()> {
    put_len(out, bytes.len())?;
    out.extend_from_slice(bytes);
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::Truncated)?;
        let slice = self.buf.get(self.pos..end).ok_or(Error::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = self.u32()? as usize;
        self.take(n)
    }

    fn string(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?.to_vec())
            .map_err(|e| Error::format("model file", format!("invalid utf-8: {e}")))
    }
}
