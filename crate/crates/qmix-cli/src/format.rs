//! Mixture and POVM file formats.
//!
//! Both are JSON documents. A mixture file:
//!
//! ```json
//! {
//!   "dim": 2,
//!   "components": [
//!     { "re": [[1.0, 0.0], [0.0, 0.0]], "im": [[0.0, 0.0], [0.0, 0.0]] },
//!     { "bloch": [0.0, 0.0, -1.0] }
//!   ],
//!   "labels": ["up", "down"]
//! }
//! ```
//!
//! `re`/`im` are row-major grids (the `im` grid may be omitted for real
//! matrices); qubit components may instead give a Bloch 3-vector. A POVM
//! file has the same matrix entries under `"elements"`. All numbers are
//! decimal. Parse errors carry line/column positions; semantic errors name
//! the offending component.

use num_complex::Complex64;
use serde::Deserialize;

use qmix::bayes::Povm;
use qmix::mixture::bloch_to_density;
use qmix::{DensityMatrix, GeneralizedMixture, HermitianMatrix};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixtureFile {
    dim: usize,
    components: Vec<MatrixEntry>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PovmFile {
    dim: usize,
    elements: Vec<MatrixEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixEntry {
    #[serde(default)]
    re: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    im: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    bloch: Option<[f64; 3]>,
}

fn grid_to_matrix(
    dim: usize,
    entry: &MatrixEntry,
    what: &str,
    index: usize,
) -> anyhow::Result<HermitianMatrix> {
    if let Some(b) = entry.bloch {
        if dim != 2 {
            anyhow::bail!("{what} {index}: Bloch vectors require dim = 2, file has dim = {dim}");
        }
        if entry.re.is_some() || entry.im.is_some() {
            anyhow::bail!("{what} {index}: give either a Bloch vector or re/im grids, not both");
        }
        return Ok(bloch_to_density(b)
            .map_err(|e| anyhow::anyhow!("{what} {index}: {e}"))?
            .into_matrix());
    }
    let re = entry
        .re
        .as_ref()
        .ok_or_else(|| anyhow::anyhow!("{what} {index}: missing \"re\" grid (or \"bloch\")"))?;
    let zero_row = vec![0.0; dim];
    let mut entries = Vec::with_capacity(dim * dim);
    for i in 0..dim {
        let re_row = re.get(i).ok_or_else(|| {
            anyhow::anyhow!("{what} {index}: \"re\" has {} rows, needs {dim}", re.len())
        })?;
        let im_row = match &entry.im {
            Some(im) => im.get(i).ok_or_else(|| {
                anyhow::anyhow!("{what} {index}: \"im\" has {} rows, needs {dim}", im.len())
            })?,
            None => &zero_row,
        };
        if re_row.len() != dim || im_row.len() != dim {
            anyhow::bail!("{what} {index}: row {i} has wrong length (needs {dim})");
        }
        for j in 0..dim {
            entries.push(Complex64::new(re_row[j], im_row[j]));
        }
    }
    HermitianMatrix::new(dim, entries).map_err(|e| anyhow::anyhow!("{what} {index}: {e}"))
}

/// Parse a mixture definition; returns the mixture and optional labels.
pub fn parse_mixture(text: &str) -> anyhow::Result<(GeneralizedMixture, Option<Vec<String>>)> {
    let file: MixtureFile = serde_json::from_str(text).map_err(|e| {
        anyhow::anyhow!(
            "mixture file: {e} (line {}, column {})",
            e.line(),
            e.column()
        )
    })?;
    if file.dim == 0 {
        anyhow::bail!("mixture file: dim must be positive");
    }
    if file.components.is_empty() {
        anyhow::bail!("mixture file: at least one component required");
    }
    if let Some(labels) = &file.labels {
        if labels.len() != file.components.len() {
            anyhow::bail!(
                "mixture file: {} labels for {} components",
                labels.len(),
                file.components.len()
            );
        }
    }
    let components = file
        .components
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let m = grid_to_matrix(file.dim, entry, "component", i)?;
            DensityMatrix::new(m).map_err(|e| anyhow::anyhow!("component {i}: {e}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mixture = GeneralizedMixture::linear(components)?;
    Ok((mixture, file.labels))
}

/// Parse a POVM definition.
pub fn parse_povm(text: &str) -> anyhow::Result<Povm> {
    let file: PovmFile = serde_json::from_str(text).map_err(|e| {
        anyhow::anyhow!("POVM file: {e} (line {}, column {})", e.line(), e.column())
    })?;
    let elements = file
        .elements
        .iter()
        .enumerate()
        .map(|(i, entry)| grid_to_matrix(file.dim, entry, "element", i))
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Povm::new(elements)?)
}
