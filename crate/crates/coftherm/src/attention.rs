//! Attention-stack container and per-atom score aggregation.
//!
//! Stacks are exported multi-layer, multi-head attention tensors. Two
//! container forms are read: a binary layout (magic `ATNS`) and a JSON
//! mirror. Byte layout of the binary form, all integers little-endian:
//!
//! ```text
//! bytes 0..4    magic "ATNS"
//! u32           version (1)
//! u32 × 3       n_layers, n_heads, n_tokens
//! i32 × n_tokens  token map: ≥0 atom index, −1 aggregate, −2 global patch
//! f32 × n_layers·n_heads·n_tokens²  row-major matrices, layer-major
//! ```
//!
//! Aggregation follows the attention-rollout convention: per layer the
//! head-mean matrix is mixed with the identity (residual weight w),
//! re-row-normalized, and the per-layer matrices are multiplied across
//! layers; the aggregate-token row of the joint matrix, restricted to
//! atom tokens and renormalized, is the per-atom score.
//!
//! Matrices are stored in float32 (as exported); all aggregation
//! arithmetic runs in float64.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const MAGIC: &[u8; 4] = b"ATNS";
const VERSION: u32 = 1;
/// Loader tolerance on row sums (float32 exports of softmax rows).
const ROW_SUM_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    Atom(usize),
    Aggregate,
    GlobalPatch,
}

#[derive(Debug, Clone)]
pub struct AttentionStack {
    pub n_layers: usize,
    pub n_heads: usize,
    pub n_tokens: usize,
    pub token_map: Vec<TokenKind>,
    /// `matrices[layer * n_heads + head]`, each row-major n_tokens².
    matrices: Vec<Vec<f32>>,
}

/// Normalized per-atom relevance scores.
#[derive(Debug, Clone, Serialize)]
pub struct AtomAttention {
    /// Atom index of each score slot (from the token map).
    pub atom_indices: Vec<usize>,
    /// Non-negative, sums to 1.
    pub scores: Vec<f64>,
}

impl AttentionStack {
    /// Validate and build. Rows must sum to 1 within 1e-3; they are then
    /// renormalized exactly (in f64) so downstream products are stable.
    pub fn new(
        n_layers: usize,
        n_heads: usize,
        n_tokens: usize,
        token_map: Vec<TokenKind>,
        mut matrices: Vec<Vec<f32>>,
    ) -> Result<Self> {
        if n_layers == 0 || n_heads == 0 || n_tokens == 0 {
            return Err(Error::Attention(
                "layers, heads, and tokens must all be positive".into(),
            ));
        }
        if token_map.len() != n_tokens {
            return Err(Error::Attention(format!(
                "token map has {} entries for {} tokens",
                token_map.len(),
                n_tokens
            )));
        }
        let aggregates = token_map
            .iter()
            .filter(|t| matches!(t, TokenKind::Aggregate))
            .count();
        if aggregates != 1 {
            return Err(Error::Attention(format!(
                "expected exactly one aggregate token, found {aggregates}"
            )));
        }
        let mut atom_ids: Vec<usize> = token_map
            .iter()
            .filter_map(|t| match t {
                TokenKind::Atom(i) => Some(*i),
                _ => None,
            })
            .collect();
        let n_atoms = atom_ids.len();
        atom_ids.sort_unstable();
        atom_ids.dedup();
        if atom_ids.len() != n_atoms {
            return Err(Error::Attention("duplicate atom token in map".into()));
        }
        if n_atoms == 0 {
            return Err(Error::Attention("token map has no atom tokens".into()));
        }
        if matrices.len() != n_layers * n_heads {
            return Err(Error::Attention(format!(
                "expected {} matrices, got {}",
                n_layers * n_heads,
                matrices.len()
            )));
        }
        for (m, matrix) in matrices.iter_mut().enumerate() {
            if matrix.len() != n_tokens * n_tokens {
                return Err(Error::Attention(format!(
                    "matrix {m} has {} entries, expected {}",
                    matrix.len(),
                    n_tokens * n_tokens
                )));
            }
            for r in 0..n_tokens {
                let row = &mut matrix[r * n_tokens..(r + 1) * n_tokens];
                if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::Attention(format!(
                        "matrix {m} row {r} has negative or non-finite entries"
                    )));
                }
                let sum: f64 = row.iter().map(|&v| v as f64).sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(Error::Attention(format!(
                        "matrix {m} row {r} sums to {sum}, expected 1 ± {ROW_SUM_TOL}"
                    )));
                }
                for v in row.iter_mut() {
                    *v = (*v as f64 / sum) as f32;
                }
            }
        }
        Ok(AttentionStack {
            n_layers,
            n_heads,
            n_tokens,
            token_map,
            matrices,
        })
    }

    pub fn matrix(&self, layer: usize, head: usize) -> &[f32] {
        &self.matrices[layer * self.n_heads + head]
    }

    pub fn n_atom_tokens(&self) -> usize {
        self.token_map
            .iter()
            .filter(|t| matches!(t, TokenKind::Atom(_)))
            .count()
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonStack {
    layers: usize,
    heads: usize,
    tokens: usize,
    token_map: Vec<JsonToken>,
    /// `matrices[layer][head][row][col]`
    matrices: Vec<Vec<Vec<Vec<f32>>>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum JsonToken {
    Atom(usize),
    Tag(String),
}

fn stack_from_json(text: &str) -> Result<AttentionStack> {
    let raw: JsonStack =
        serde_json::from_str(text).map_err(|e| Error::Attention(format!("bad JSON stack: {e}")))?;
    let token_map = raw
        .token_map
        .iter()
        .map(|t| match t {
            JsonToken::Atom(i) => Ok(TokenKind::Atom(*i)),
            JsonToken::Tag(s) if s == "aggregate" => Ok(TokenKind::Aggregate),
            JsonToken::Tag(s) if s == "patch" => Ok(TokenKind::GlobalPatch),
            JsonToken::Tag(s) => Err(Error::Attention(format!("unknown token tag {s:?}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let mut matrices = Vec::with_capacity(raw.layers * raw.heads);
    if raw.matrices.len() != raw.layers {
        return Err(Error::Attention("matrices/layers mismatch".into()));
    }
    for layer in &raw.matrices {
        if layer.len() != raw.heads {
            return Err(Error::Attention("matrices/heads mismatch".into()));
        }
        for head in layer {
            let mut flat = Vec::with_capacity(raw.tokens * raw.tokens);
            if head.len() != raw.tokens {
                return Err(Error::Attention("matrix row count mismatch".into()));
            }
            for row in head {
                if row.len() != raw.tokens {
                    return Err(Error::Attention("matrix column count mismatch".into()));
                }
                flat.extend_from_slice(row);
            }
            matrices.push(flat);
        }
    }
    AttentionStack::new(raw.layers, raw.heads, raw.tokens, token_map, matrices)
}

/// Load a stack; binary `ATNS` files are recognized by magic, anything
/// else is parsed as the JSON mirror.
pub fn load_attention(path: &Path) -> Result<AttentionStack> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.len() >= 4 && &bytes[..4] == MAGIC {
        stack_from_binary(&bytes)
    } else {
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::Attention("file is neither ATNS binary nor UTF-8 JSON".into()))?;
        stack_from_json(&text)
    }
}

fn stack_from_binary(bytes: &[u8]) -> Result<AttentionStack> {
    let mut cursor = std::io::Cursor::new(bytes);
    let mut magic = [0u8; 4];
    cursor
        .read_exact(&mut magic)
        .map_err(|_| Error::Attention("truncated header".into()))?;
    let mut u32buf = [0u8; 4];
    let mut read_u32 = |cursor: &mut std::io::Cursor<&[u8]>| -> Result<u32> {
        cursor
            .read_exact(&mut u32buf)
            .map_err(|_| Error::Attention("truncated header".into()))?;
        Ok(u32::from_le_bytes(u32buf))
    };
    let version = read_u32(&mut cursor)?;
    if version != VERSION {
        return Err(Error::Attention(format!(
            "unsupported container version {version}"
        )));
    }
    let n_layers = read_u32(&mut cursor)? as usize;
    let n_heads = read_u32(&mut cursor)? as usize;
    let n_tokens = read_u32(&mut cursor)? as usize;
    let mut token_map = Vec::with_capacity(n_tokens);
    for _ in 0..n_tokens {
        let mut b = [0u8; 4];
        cursor
            .read_exact(&mut b)
            .map_err(|_| Error::Attention("truncated token map".into()))?;
        let v = i32::from_le_bytes(b);
        token_map.push(match v {
            -1 => TokenKind::Aggregate,
            -2 => TokenKind::GlobalPatch,
            i if i >= 0 => TokenKind::Atom(i as usize),
            other => {
                return Err(Error::Attention(format!(
                    "unknown token-map code {other}"
                )))
            }
        });
    }
    let n_mat = n_layers
        .checked_mul(n_heads)
        .ok_or_else(|| Error::Attention("header overflow".into()))?;
    let mut matrices = Vec::with_capacity(n_mat);
    let mut f32buf = [0u8; 4];
    for _ in 0..n_mat {
        let mut m = Vec::with_capacity(n_tokens * n_tokens);
        for _ in 0..n_tokens * n_tokens {
            cursor
                .read_exact(&mut f32buf)
                .map_err(|_| Error::Attention("truncated matrix data".into()))?;
            m.push(f32::from_le_bytes(f32buf));
        }
        matrices.push(m);
    }
    AttentionStack::new(n_layers, n_heads, n_tokens, token_map, matrices)
}

/// Write the binary `ATNS` container.
pub fn write_attention(stack: &AttentionStack, path: &Path) -> Result<()> {
    let mut out: Vec<u8> = Vec::new();
    out.write_all(MAGIC).unwrap();
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(stack.n_layers as u32).to_le_bytes());
    out.extend_from_slice(&(stack.n_heads as u32).to_le_bytes());
    out.extend_from_slice(&(stack.n_tokens as u32).to_le_bytes());
    for t in &stack.token_map {
        let code: i32 = match t {
            TokenKind::Atom(i) => *i as i32,
            TokenKind::Aggregate => -1,
            TokenKind::GlobalPatch => -2,
        };
        out.extend_from_slice(&code.to_le_bytes());
    }
    for m in &stack.matrices {
        for v in m {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Which slice of the joint matrix becomes the per-atom score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// The aggregate token's row (its attention over atoms).
    #[default]
    AggregateRow,
    /// Column mass: total incoming attention per atom token.
    ColumnMass,
}

/// Attention rollout with identity-residual mixing (default w = 0.5).
pub fn rollout(stack: &AttentionStack, residual_weight: f64) -> Result<AtomAttention> {
    rollout_with(stack, residual_weight, Reduction::AggregateRow)
}

pub fn rollout_with(
    stack: &AttentionStack,
    residual_weight: f64,
    reduction: Reduction,
) -> Result<AtomAttention> {
    if !(0.0..1.0).contains(&residual_weight) {
        return Err(Error::Attention(format!(
            "residual weight must be in [0, 1), got {residual_weight}"
        )));
    }
    let n = stack.n_tokens;

    // joint = A'_L · A'_{L−1} · … · A'_1
    let mut joint: Option<Vec<f64>> = None;
    for layer in 0..stack.n_layers {
        let mut mixed = vec![0.0f64; n * n];
        for head in 0..stack.n_heads {
            let m = stack.matrix(layer, head);
            for (dst, &src) in mixed.iter_mut().zip(m.iter()) {
                *dst += src as f64;
            }
        }
        let inv_heads = 1.0 / stack.n_heads as f64;
        for v in mixed.iter_mut() {
            *v *= inv_heads * (1.0 - residual_weight);
        }
        for d in 0..n {
            mixed[d * n + d] += residual_weight;
        }
        for r in 0..n {
            let row = &mut mixed[r * n..(r + 1) * n];
            let sum: f64 = row.iter().sum();
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        joint = Some(match joint {
            None => mixed,
            Some(prev) => mat_mul(&mixed, &prev, n),
        });
    }
    let joint = joint.expect("n_layers > 0 is validated");

    let agg_row = stack
        .token_map
        .iter()
        .position(|t| matches!(t, TokenKind::Aggregate))
        .ok_or_else(|| Error::Attention("no aggregate token in map".into()))?;

    let mut atom_indices = Vec::new();
    let mut scores = Vec::new();
    for (tok, kind) in stack.token_map.iter().enumerate() {
        if let TokenKind::Atom(i) = kind {
            atom_indices.push(*i);
            let v = match reduction {
                Reduction::AggregateRow => joint[agg_row * n + tok],
                Reduction::ColumnMass => (0..n).map(|r| joint[r * n + tok]).sum(),
            };
            scores.push(v);
        }
    }
    let total: f64 = scores.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Attention(
            "degenerate rollout: no attention mass reaches the atom tokens".into(),
        ));
    }
    for s in &mut scores {
        *s /= total;
    }
    Ok(AtomAttention {
        atom_indices,
        scores,
    })
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}
