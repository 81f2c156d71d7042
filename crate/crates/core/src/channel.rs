//! Discrete memoryless channels.
//!
//! A channel is a row-stochastic `|X|×|Y|` matrix whose row `a` is the
//! conditional pmf `W(·|a)`. The n-letter extension is never materialized;
//! sequence quantities are products of per-letter factors.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Absolute tolerance on row sums of stochastic matrices and pmfs.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// A validated discrete memoryless channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChannelFile", into = "ChannelFile")]
pub struct Channel {
    inputs: usize,
    outputs: usize,
    // row-major, inputs × outputs
    probs: Vec<f64>,
}

/// On-disk layout of a channel file.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ChannelFile {
    inputs: usize,
    outputs: usize,
    matrix: Vec<Vec<f64>>,
}

impl TryFrom<ChannelFile> for Channel {
    type Error = Error;

    fn try_from(f: ChannelFile) -> Result<Self> {
        let ch = Channel::new(f.matrix)?;
        check_declared_sizes(&ch, f.inputs, f.outputs)?;
        Ok(ch)
    }
}

impl From<Channel> for ChannelFile {
    fn from(ch: Channel) -> Self {
        ChannelFile {
            inputs: ch.inputs,
            outputs: ch.outputs,
            matrix: ch.rows().map(<[f64]>::to_vec).collect(),
        }
    }
}

fn check_declared_sizes(ch: &Channel, inputs: usize, outputs: usize) -> Result<()> {
    if ch.inputs != inputs {
        return Err(Error::Parse(format!(
            "\"inputs\" is {inputs} but matrix has {} rows",
            ch.inputs
        )));
    }
    if ch.outputs != outputs {
        return Err(Error::Parse(format!(
            "\"outputs\" is {outputs} but matrix rows have {} entries",
            ch.outputs
        )));
    }
    Ok(())
}

impl Channel {
    /// Validates a matrix of transition probabilities.
    ///
    /// Entries are stored as given; a channel that is off by more than
    /// [`STOCHASTIC_TOL`] is rejected rather than renormalized.
    pub fn new(matrix: Vec<Vec<f64>>) -> Result<Self> {
        let inputs = matrix.len();
        let outputs = matrix.first().map_or(0, Vec::len);
        for (row, r) in matrix.iter().enumerate() {
            if r.len() != outputs {
                return Err(Error::NotRectangular {
                    row,
                    expected: outputs,
                    found: r.len(),
                });
            }
        }
        if inputs < 2 || outputs < 2 {
            return Err(Error::DegenerateAlphabet { inputs, outputs });
        }
        for (row, r) in matrix.iter().enumerate() {
            for (col, &value) in r.iter().enumerate() {
                if !value.is_finite() {
                    return Err(Error::NonFiniteEntry { row, col });
                }
                if value < 0.0 {
                    return Err(Error::NegativeEntry { row, col, value });
                }
            }
            let sum: f64 = r.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::RowSumViolation { row, sum });
            }
        }
        Ok(Channel {
            inputs,
            outputs,
            probs: matrix.into_iter().flatten().collect(),
        })
    }

    /// Binary symmetric channel with crossover probability `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; outputs are `0`, `1`, erasure.
    pub fn bec(e: f64) -> Result<Self> {
        Channel::new(vec![vec![1.0 - e, 0.0, e], vec![0.0, 1.0 - e, e]])
    }

    /// Parses a channel file: `{"inputs": .., "outputs": .., "matrix": [[..], ..]}`.
    ///
    /// Errors name the offending row and column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = v
            .as_object()
            .ok_or_else(|| Error::Parse("channel file must be a JSON object".into()))?;
        let size = |key: &str| -> Result<usize> {
            obj.get(key)
                .and_then(Value::as_u64)
                .and_then(|x| usize::try_from(x).ok())
                .ok_or_else(|| Error::Parse(format!("missing or non-integer \"{key}\"")))
        };
        let inputs = size("inputs")?;
        let outputs = size("outputs")?;
        let rows = obj
            .get("matrix")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("missing or non-array \"matrix\"".into()))?;
        let mut matrix = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter().enumerate() {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Parse(format!("row {i}: not an array")))?;
            let parsed = row
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    x.as_f64()
                        .ok_or_else(|| Error::Parse(format!("row {i}, column {j}: not a number")))
                })
                .collect::<Result<Vec<f64>>>()?;
            matrix.push(parsed);
        }
        let ch = Channel::new(matrix)?;
        check_declared_sizes(&ch, inputs, outputs)?;
        Ok(ch)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serialization is infallible")
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    /// Conditional pmf `W(·|a)`.
    ///
    /// # Panics
    ///
    /// Panics if `a` is not a valid input symbol.
    pub fn row(&self, a: usize) -> &[f64] {
        &self.probs[a * self.outputs..(a + 1) * self.outputs]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.outputs)
    }

    /// `W(y|a)`.
    pub fn prob(&self, a: usize, y: usize) -> f64 {
        self.probs[a * self.outputs + y]
    }

    fn check_input(&self, a: usize) -> Result<()> {
        if a < self.inputs {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: a,
                size: self.inputs,
            })
        }
    }

    /// Bhattacharyya coefficient `Σ_y √(W(y|a)·W(y|b))`.
    ///
    /// Square roots are taken per term so that zero entries contribute
    /// exactly zero.
    pub fn bhattacharyya(&self, a: usize, b: usize) -> Result<f64> {
        self.check_input(a)?;
        self.check_input(b)?;
        Ok(self.bhattacharyya_unchecked(a, b))
    }

    fn bhattacharyya_unchecked(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return 1.0;
        }
        let z: f64 = self
            .row(a)
            .iter()
            .zip(self.row(b))
            .map(|(&p, &q)| (p * q).sqrt())
            .sum();
        z.clamp(0.0, 1.0)
    }

    /// All pairwise Bhattacharyya coefficients.
    pub fn bhattacharyya_matrix(&self) -> BhattMatrix {
        let k = self.inputs;
        let mut z = vec![0.0; k * k];
        for a in 0..k {
            z[a * k + a] = 1.0;
            for b in (a + 1)..k {
                let v = self.bhattacharyya_unchecked(a, b);
                z[a * k + b] = v;
                z[b * k + a] = v;
            }
        }
        BhattMatrix { size: k, z }
    }

    /// `W^n(y|x) = Π_i W(y_i|x_i)`.
    pub fn sequence_likelihood(&self, x: &[usize], y: &[usize]) -> Result<f64> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        let mut p = 1.0;
        for (&a, &b) in x.iter().zip(y) {
            self.check_input(a)?;
            if b >= self.outputs {
                return Err(Error::IndexOutOfRange {
                    index: b,
                    size: self.outputs,
                });
            }
            p *= self.prob(a, b);
        }
        Ok(p)
    }
}

/// Symmetric table of single-letter Bhattacharyya coefficients `Z(a,b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BhattMatrix {
    size: usize,
    z: Vec<f64>,
}

impl BhattMatrix {
    /// Number of input symbols.
    pub fn size(&self) -> usize {
        self.size
    }

    /// `Z(a,b)`.
    ///
    /// # Panics
    ///
    /// Panics if either symbol is out of range.
    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        assert!(a < self.size && b < self.size, "symbol out of range");
        self.z[a * self.size + b]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.z
            .chunks_exact(self.size)
            .map(<[f64]>::to_vec)
            .collect()
    }

    /// Multi-letter coefficient `Z_n(x, x2) = Π_i Z(x_i, x2_i)`.
    ///
    /// Exact for memoryless channels; returns exactly `0.0` as soon as a
    /// factor vanishes.
    pub fn sequence(&self, x: &[usize], x2: &[usize]) -> Result<f64> {
        if x.len() != x2.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: x2.len(),
            });
        }
        if let Some(&bad) = x.iter().chain(x2).find(|&&s| s >= self.size) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                size: self.size,
            });
        }
        Ok(self.sequence_unchecked(x, x2))
    }

    /// [`BhattMatrix::sequence`] for callers that already validated symbols
    /// and lengths.
    #[inline]
    pub(crate) fn sequence_unchecked(&self, x: &[usize], x2: &[usize]) -> f64 {
        let mut p = 1.0;
        for (&a, &b) in x.iter().zip(x2) {
            let f = self.z[a * self.size + b];
            if f == 0.0 {
                return 0.0;
            }
            p *= f;
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noiseless() -> Channel {
        Channel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap()
    }

    #[test]
    fn validate_examples() {
        let bsc = Channel::new(vec![vec![0.9, 0.1], vec![0.1, 0.9]]).unwrap();
        assert_eq!(bsc.inputs(), 2);
        assert_eq!(bsc.row(0), &[0.9, 0.1]);
        assert!(matches!(
            Channel::new(vec![vec![0.9, 0.2], vec![0.1, 0.9]]),
            Err(Error::RowSumViolation { row: 0, .. })
        ));
        assert_eq!(noiseless().row(1), &[0.0, 1.0]);
    }

    #[test]
    fn validate_errors() {
        assert!(matches!(
            Channel::new(vec![vec![1.0, 0.0]]),
            Err(Error::DegenerateAlphabet { .. })
        ));
        assert!(matches!(
            Channel::new(vec![vec![1.0], vec![1.0]]),
            Err(Error::DegenerateAlphabet { .. })
        ));
        assert!(matches!(
            Channel::new(vec![vec![1.1, -0.1], vec![0.5, 0.5]]),
            Err(Error::NegativeEntry { row: 0, col: 1, .. })
        ));
        assert!(matches!(
            Channel::new(vec![vec![0.5, 0.5], vec![1.0]]),
            Err(Error::NotRectangular { row: 1, .. })
        ));
        assert!(matches!(
            Channel::new(vec![vec![0.5, 0.5], vec![f64::NAN, 1.0]]),
            Err(Error::NonFiniteEntry { row: 1, col: 0 })
        ));
        // just inside / outside the stochasticity tolerance
        assert!(Channel::new(vec![vec![0.5, 0.5 + 5e-13], vec![0.5, 0.5]]).is_ok());
        assert!(Channel::new(vec![vec![0.5, 0.5 + 5e-12], vec![0.5, 0.5]]).is_err());
    }

    #[test]
    fn bhattacharyya_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        assert!((bsc.bhattacharyya(0, 1).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(bsc.bhattacharyya(1, 1).unwrap(), 1.0);
        let bec = Channel::bec(0.3).unwrap();
        assert!((bec.bhattacharyya(0, 1).unwrap() - 0.3).abs() < 1e-15);
        assert!(matches!(
            bsc.bhattacharyya(0, 2),
            Err(Error::IndexOutOfRange { index: 2, size: 2 })
        ));
    }

    #[test]
    fn bhattacharyya_matrix_examples() {
        let bm = Channel::bsc(0.1).unwrap().bhattacharyya_matrix();
        assert_eq!(bm.get(0, 0), 1.0);
        assert!((bm.get(0, 1) - 0.6).abs() < 1e-15);
        assert_eq!(bm.get(0, 1), bm.get(1, 0));
        assert_eq!(
            noiseless().bhattacharyya_matrix().to_rows(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0]]
        );
        let three = Channel::new(vec![
            vec![0.2, 0.3, 0.5],
            vec![0.7, 0.2, 0.1],
            vec![0.2, 0.3, 0.5],
        ])
        .unwrap();
        assert!((three.bhattacharyya_matrix().get(0, 2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sequence_examples() {
        let bm = Channel::bsc(0.1).unwrap().bhattacharyya_matrix();
        assert!((bm.sequence(&[0, 0], &[1, 1]).unwrap() - 0.36).abs() < 1e-15);
        assert_eq!(bm.sequence(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        let nl = noiseless().bhattacharyya_matrix();
        assert_eq!(nl.sequence(&[0, 1], &[1, 1]).unwrap(), 0.0);
        assert!(matches!(
            bm.sequence(&[0], &[0, 1]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(
            bm.sequence(&[0, 3], &[0, 1]),
            Err(Error::IndexOutOfRange { index: 3, .. })
        ));
    }

    #[test]
    fn likelihood_examples() {
        let bsc = Channel::bsc(0.1).unwrap();
        assert!((bsc.sequence_likelihood(&[0, 0], &[0, 0]).unwrap() - 0.81).abs() < 1e-15);
        assert!((bsc.sequence_likelihood(&[0, 0], &[1, 1]).unwrap() - 0.01).abs() < 1e-15);
        let bec = Channel::bec(0.3).unwrap();
        assert_eq!(bec.sequence_likelihood(&[1], &[2]).unwrap(), 0.3);
        assert!(bec.sequence_likelihood(&[1], &[3]).is_err());
        assert!(bec.sequence_likelihood(&[1], &[0, 1]).is_err());
    }

    #[test]
    fn json_round_trip_and_errors() {
        let text = r#"{"inputs": 2, "outputs": 3, "matrix": [[0.7, 0.0, 0.3], [0.0, 0.7, 0.3]]}"#;
        let ch = Channel::from_json_str(text).unwrap();
        assert_eq!(ch, Channel::bec(0.3).unwrap());
        let back: Channel = serde_json::from_str(&ch.to_json_string()).unwrap();
        assert_eq!(back, ch);

        let bad = r#"{"inputs": 2, "outputs": 2, "matrix": [[0.5, 0.5], [0.5, "x"]]}"#;
        let msg = Channel::from_json_str(bad).unwrap_err().to_string();
        assert!(msg.contains("row 1, column 1"), "{msg}");
        let neg = r#"{"inputs": 2, "outputs": 2, "matrix": [[0.5, 0.5], [1.5, -0.5]]}"#;
        assert!(matches!(
            Channel::from_json_str(neg),
            Err(Error::NegativeEntry { row: 1, col: 1, .. })
        ));
        let sizes = r#"{"inputs": 3, "outputs": 2, "matrix": [[0.5, 0.5], [0.5, 0.5]]}"#;
        assert!(matches!(
            Channel::from_json_str(sizes),
            Err(Error::Parse(_))
        ));
        assert!(Channel::from_json_str("[1, 2]").is_err());
        assert!(Channel::from_json_str("{").is_err());
    }
}
