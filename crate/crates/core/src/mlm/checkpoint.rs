//! Binary checkpoints for the micro MLM.
//!
//! Two kinds share one container. A *full* checkpoint stores every tensor
//! and reconstructs a model on its own. A *prompt* checkpoint stores only
//! what prompt tuning actually trained — the soft prompt, plus the head
//! unless it was frozen — together with a SHA-256 digest of the frozen base
//! tensors, so loading can refuse a prompt that was tuned against a
//! different backbone.
//!
//! Writes are deterministic: tensors are emitted in the fixed declaration
//! order, so saving the same model twice produces byte-identical files.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::Array2;
use sha2::{Digest, Sha256};

use crate::error::{CoreError, Result};

use super::{FrozenFlags, MicroMlm, MlmDims, Placement, TENSOR_NAMES};

const MAGIC: &[u8; 6] = b"LECMLM";
const VERSION: u16 = 1;

const KIND_FULL: u8 = 0;
const KIND_PROMPT: u8 = 1;

fn bad(field: &'static str, message: impl Into<String>) -> CoreError {
    CoreError::Persistence {
        field,
        message: message.into(),
    }
}

fn placement_code(p: Placement) -> u8 {
    match p {
        Placement::Front => 0,
        Placement::Back => 1,
        Placement::Mid => 2,
        Placement::Random => 3,
    }
}

fn placement_from(code: u8) -> Result<Placement> {
    Ok(match code {
        0 => Placement::Front,
        1 => Placement::Back,
        2 => Placement::Mid,
        3 => Placement::Random,
        other => return Err(bad("placement", format!("unknown code {other}"))),
    })
}

/// Expected shape of each tensor given the model dimensions.
fn shape_of(name: &str, dims: &MlmDims) -> (usize, usize) {
    let MlmDims {
        vocab,
        d,
        max_len,
        prompt_len,
    } = *dims;
    match name {
        "e_text" => (vocab, d),
        "e_pos" => (max_len, d),
        "wq" | "wk" | "wv" | "wo" => (d, d),
        "bq" | "bk" | "bv" | "bo" | "b2" => (1, d),
        "w1" => (d, 4 * d),
        "b1" => (1, 4 * d),
        "w2" => (4 * d, d),
        "prompt" => (prompt_len, d),
        "wh" => (d, vocab),
        "bh" => (1, vocab),
        other => panic!("unknown tensor name {other:?}"),
    }
}

/// Tensor names a prompt checkpoint stores (everything prompt tuning may
/// have moved); the complement is what gets hashed.
fn prompt_payload_names(frozen: FrozenFlags) -> Vec<&'static str> {
    let mut names = vec!["prompt"];
    if !frozen.head {
        names.push("wh");
        names.push("bh");
    }
    names
}

/// SHA-256 over the dimensions and every tensor *not* in `stored`, in
/// declaration order. This pins the frozen base a prompt was tuned against.
fn base_digest(model: &MicroMlm, stored: &[&str]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    for dim in [
        model.dims.vocab,
        model.dims.d,
        model.dims.max_len,
        model.dims.prompt_len,
    ] {
        hasher.update((dim as u32).to_le_bytes());
    }
    for name in TENSOR_NAMES {
        if stored.contains(&name) {
            continue;
        }
        hasher.update(name.as_bytes());
        let t = model.tensor(name);
        hasher.update((t.nrows() as u32).to_le_bytes());
        hasher.update((t.ncols() as u32).to_le_bytes());
        for &v in t.as_slice().unwrap() {
            hasher.update(v.to_le_bytes());
        }
    }
    hasher.finalize().into()
}

fn write_header<W: Write>(
    w: &mut W,
    model: &MicroMlm,
    kind: u8,
) -> std::io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u16::<LittleEndian>(VERSION)?;
    w.write_u8(kind)?;
    w.write_u8(placement_code(model.placement))?;
    for flag in [
        model.frozen.embeddings,
        model.frozen.backbone,
        model.frozen.prompt,
        model.frozen.head,
    ] {
        w.write_u8(flag as u8)?;
    }
    for dim in [
        model.dims.vocab,
        model.dims.d,
        model.dims.max_len,
        model.dims.prompt_len,
    ] {
        w.write_u32::<LittleEndian>(dim as u32)?;
    }
    Ok(())
}

fn write_tensors<W: Write>(w: &mut W, model: &MicroMlm, names: &[&str]) -> std::io::Result<()> {
    w.write_u32::<LittleEndian>(names.len() as u32)?;
    for name in names {
        let bytes = name.as_bytes();
        w.write_u16::<LittleEndian>(bytes.len() as u16)?;
        w.write_all(bytes)?;
        let t = model.tensor(name);
        w.write_u32::<LittleEndian>(t.nrows() as u32)?;
        w.write_u32::<LittleEndian>(t.ncols() as u32)?;
        for &v in t.as_slice().unwrap() {
            w.write_f64::<LittleEndian>(v)?;
        }
    }
    Ok(())
}

/// Save every tensor; the file reconstructs the model on its own.
pub fn save_full(model: &MicroMlm, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    write_header(&mut buf, model, KIND_FULL).map_err(|e| CoreError::io(path, e))?;
    write_tensors(&mut buf, model, &TENSOR_NAMES).map_err(|e| CoreError::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| CoreError::io(path, e))
}

/// Save only what prompt tuning trained, plus a digest of the frozen base.
pub fn save_prompt(model: &MicroMlm, path: &Path) -> Result<()> {
    let stored = prompt_payload_names(model.frozen);
    let digest = base_digest(model, &stored);
    let mut buf = Vec::new();
    write_header(&mut buf, model, KIND_PROMPT).map_err(|e| CoreError::io(path, e))?;
    buf.extend_from_slice(&digest);
    write_tensors(&mut buf, model, &stored).map_err(|e| CoreError::io(path, e))?;
    std::fs::write(path, buf).map_err(|e| CoreError::io(path, e))
}

struct Header {
    kind: u8,
    placement: Placement,
    frozen: FrozenFlags,
    dims: MlmDims,
}

fn read_header<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic).map_err(|e| bad("magic", e.to_string()))?;
    if &magic != MAGIC {
        return Err(bad("magic", "not a model checkpoint"));
    }
    let version = r
        .read_u16::<LittleEndian>()
        .map_err(|e| bad("version", e.to_string()))?;
    if version != VERSION {
        return Err(bad("version", format!("unsupported version {version}")));
    }
    let kind = r.read_u8().map_err(|e| bad("kind", e.to_string()))?;
    if kind != KIND_FULL && kind != KIND_PROMPT {
        return Err(bad("kind", format!("unknown kind {kind}")));
    }
    let placement = placement_from(r.read_u8().map_err(|e| bad("placement", e.to_string()))?)?;
    let mut flags = [0u8; 4];
    r.read_exact(&mut flags).map_err(|e| bad("frozen", e.to_string()))?;
    if flags.iter().any(|&f| f > 1) {
        return Err(bad("frozen", "flag bytes must be 0 or 1"));
    }
    let frozen = FrozenFlags {
        embeddings: flags[0] == 1,
        backbone: flags[1] == 1,
        prompt: flags[2] == 1,
        head: flags[3] == 1,
    };
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        *d = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("dims", e.to_string()))? as usize;
    }
    let dims = MlmDims {
        vocab: dims[0],
        d: dims[1],
        max_len: dims[2],
        prompt_len: dims[3],
    };
    if dims.vocab == 0 || dims.d == 0 || dims.max_len == 0 {
        return Err(bad("dims", "vocab, d, and max_len must be positive"));
    }
    Ok(Header {
        kind,
        placement,
        frozen,
        dims,
    })
}

/// Read `count` tensors, checking each name and shape against `dims`.
fn read_tensors<R: Read>(
    r: &mut R,
    dims: &MlmDims,
    expected: &[&str],
) -> Result<Vec<(String, Array2<f64>)>> {
    let count = r
        .read_u32::<LittleEndian>()
        .map_err(|e| bad("tensor", e.to_string()))? as usize;
    if count != expected.len() {
        return Err(bad(
            "tensor",
            format!("expected {} tensors, file has {count}", expected.len()),
        ));
    }
    let mut out = Vec::with_capacity(count);
    for want in expected {
        let name_len = r
            .read_u16::<LittleEndian>()
            .map_err(|e| bad("tensor", e.to_string()))? as usize;
        let mut name_buf = vec![0u8; name_len];
        r.read_exact(&mut name_buf).map_err(|e| bad("tensor", e.to_string()))?;
        let name = String::from_utf8(name_buf).map_err(|e| bad("tensor", e.to_string()))?;
        if name != *want {
            return Err(bad("tensor", format!("expected {want:?}, found {name:?}")));
        }
        let rows = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("tensor", e.to_string()))? as usize;
        let cols = r
            .read_u32::<LittleEndian>()
            .map_err(|e| bad("tensor", e.to_string()))? as usize;
        if (rows, cols) != shape_of(&name, dims) {
            return Err(bad(
                "tensor",
                format!(
                    "{name} has shape {rows}x{cols}, expected {:?}",
                    shape_of(&name, dims)
                ),
            ));
        }
        let mut data = vec![0f64; rows * cols];
        for v in data.iter_mut() {
            *v = r
                .read_f64::<LittleEndian>()
                .map_err(|e| bad("tensor", e.to_string()))?;
        }
        let array = Array2::from_shape_vec((rows, cols), data)
            .map_err(|e| bad("tensor", e.to_string()))?;
        out.push((name, array));
    }
    Ok(out)
}

fn expect_eof<R: Read>(r: &mut R) -> Result<()> {
    let mut probe = [0u8; 1];
    match r.read(&mut probe) {
        Ok(0) => Ok(()),
        Ok(_) => Err(bad("trailing", "unexpected bytes after the last tensor")),
        Err(e) => Err(bad("trailing", e.to_string())),
    }
}

/// Load a full checkpoint into a fresh model.
pub fn load_full(path: &Path) -> Result<MicroMlm> {
    let bytes = std::fs::read(path).map_err(|e| CoreError::io(path, e))?;
    let mut r = bytes.as_slice();
    let header = read_header(&mut r)?;
    if header.kind != KIND_FULL {
        return Err(bad("kind", "expected a full checkpoint, found a prompt checkpoint"));
    }
    let mut model = MicroMlm::new(header.dims, header.placement, 0);
    model.frozen = header.frozen;
    for (name, tensor) in read_tensors(&mut r, &header.dims, &TENSOR_NAMES)? {
        *model.tensor_mut(&name) = tensor;
    }
    expect_eof(&mut r)?;
    Ok(model)
}

/// Load a prompt checkpoint on top of its frozen base.
///
/// The base must match the checkpoint's architecture and hash to the digest
/// recorded at save time; otherwise the prompt was tuned against a different
/// model and loading refuses.
pub fn load_prompt(path: &Path, base: &MicroMlm) -> Result<MicroMlm> {
    let bytes = std::fs::read(path).map_err(|e| CoreError::io(path, e))?;
    let mut r = bytes.as_slice();
    let header = read_header(&mut r)?;
    if header.kind != KIND_PROMPT {
        return Err(bad("kind", "expected a prompt checkpoint, found a full checkpoint"));
    }
    let mut digest = [0u8; 32];
    r.read_exact(&mut digest).map_err(|e| bad("base_hash", e.to_string()))?;

    let stored = prompt_payload_names(header.frozen);
    let mut model = base.clone();
    model.dims.prompt_len = header.dims.prompt_len;
    model.placement = header.placement;
    model.frozen = header.frozen;
    if base.dims.vocab != header.dims.vocab
        || base.dims.d != header.dims.d
        || base.dims.max_len != header.dims.max_len
    {
        return Err(bad("dims", "base model architecture does not match the checkpoint"));
    }
    if base_digest(&model, &stored) != digest {
        return Err(bad(
            "base_hash",
            "frozen base tensors do not match the ones this prompt was tuned against",
        ));
    }
    for (name, tensor) in read_tensors(&mut r, &header.dims, &stored)? {
        *model.tensor_mut(&name) = tensor;
    }
    expect_eof(&mut r)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlm::train::{train, Mode, TrainConfig};
    use tempfile::tempdir;

    fn sample_model(prompt_len: usize, seed: u64) -> MicroMlm {
        MicroMlm::new(
            MlmDims {
                vocab: 12,
                d: 6,
                max_len: 48,
                prompt_len,
            },
            Placement::Mid,
            seed,
        )
    }

    #[test]
    fn full_checkpoint_round_trips_exactly() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let mut model = sample_model(5, 3);
        model.frozen.head = true;
        save_full(&model, &path).unwrap();
        let loaded = load_full(&path).unwrap();
        assert_eq!(loaded, model);
    }

    #[test]
    fn saves_are_byte_identical() {
        let dir = tempdir().unwrap();
        let a = dir.path().join("a.bin");
        let b = dir.path().join("b.bin");
        let model = sample_model(4, 9);
        save_full(&model, &a).unwrap();
        save_full(&model, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

        save_prompt(&model, &a).unwrap();
        save_prompt(&model, &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    }

    #[test]
    fn prompt_checkpoint_restores_a_tuned_prompt() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("prompt.bin");

        let config = TrainConfig {
            mode: Mode::Pt,
            prompt_length: 4,
            steps: 10,
            batch_size: 2,
            learning_rate: 1e-2,
            seed: 5,
            ..TrainConfig::default()
        };
        let mut tuned = sample_model(4, 11);
        tuned.frozen = config.frozen_flags();
        let base = tuned.clone();
        let sequences: Vec<Vec<usize>> = vec![(0..14).map(|i| 2 + i % 9).collect()];
        train(&mut tuned, &sequences, &config).unwrap();

        save_prompt(&tuned, &path).unwrap();
        let restored = load_prompt(&path, &base).unwrap();
        assert_eq!(restored, tuned);
    }

    #[test]
    fn prompt_checkpoint_with_frozen_head_is_prompt_bytes_only() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("prompt.bin");
        let mut model = sample_model(4, 2);
        model.frozen = FrozenFlags {
            embeddings: true,
            backbone: true,
            prompt: false,
            head: true,
        };
        save_prompt(&model, &path).unwrap();
        // header: magic 6 + version 2 + kind 1 + placement 1 + flags 4 +
        // dims 16; digest 32; tensor count 4; one entry: name (2 + 6),
        // shape 8, payload 4*6 doubles.
        let expected = 6 + 2 + 1 + 1 + 4 + 16 + 32 + 4 + (2 + 6 + 8 + 4 * 6 * 8);
        assert_eq!(std::fs::read(&path).unwrap().len(), expected);
    }

    #[test]
    fn prompt_checkpoint_rejects_a_mismatched_base() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("prompt.bin");
        let mut model = sample_model(4, 2);
        model.frozen = FrozenFlags {
            embeddings: true,
            backbone: true,
            prompt: false,
            head: false,
        };
        save_prompt(&model, &path).unwrap();

        let mut other = sample_model(4, 2);
        other.e_text[[0, 0]] += 1.0;
        let err = load_prompt(&path, &other).unwrap_err();
        assert!(matches!(err, CoreError::Persistence { field: "base_hash", .. }));

        let smaller = MicroMlm::new(
            MlmDims {
                vocab: 12,
                d: 4,
                max_len: 48,
                prompt_len: 4,
            },
            Placement::Mid,
            2,
        );
        let err = load_prompt(&path, &smaller).unwrap_err();
        assert!(matches!(err, CoreError::Persistence { field: "dims", .. }));
    }

    #[test]
    fn corruption_is_named_by_field() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = sample_model(3, 1);
        save_full(&model, &path).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut broken = good.clone();
        broken[0] = b'X';
        std::fs::write(&path, &broken).unwrap();
        assert!(matches!(
            load_full(&path).unwrap_err(),
            CoreError::Persistence { field: "magic", .. }
        ));

        let mut broken = good.clone();
        broken[6] = 99;
        std::fs::write(&path, &broken).unwrap();
        assert!(matches!(
            load_full(&path).unwrap_err(),
            CoreError::Persistence { field: "version", .. }
        ));

        std::fs::write(&path, &good[..good.len() - 8]).unwrap();
        assert!(matches!(
            load_full(&path).unwrap_err(),
            CoreError::Persistence { field: "tensor", .. }
        ));

        let mut padded = good.clone();
        padded.push(0);
        std::fs::write(&path, &padded).unwrap();
        assert!(matches!(
            load_full(&path).unwrap_err(),
            CoreError::Persistence { field: "trailing", .. }
        ));
    }

    #[test]
    fn kind_mismatch_is_rejected_both_ways() {
        let dir = tempdir().unwrap();
        let full = dir.path().join("full.bin");
        let prompt = dir.path().join("prompt.bin");
        let model = sample_model(3, 4);
        save_full(&model, &full).unwrap();
        save_prompt(&model, &prompt).unwrap();

        assert!(matches!(
            load_full(&prompt).unwrap_err(),
            CoreError::Persistence { field: "kind", .. }
        ));
        assert!(matches!(
            load_prompt(&full, &model).unwrap_err(),
            CoreError::Persistence { field: "kind", .. }
        ));
    }
}
