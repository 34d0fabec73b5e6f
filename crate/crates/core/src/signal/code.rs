use crate::linalg::{CMat, CVec, ZERO};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Unit-norm real spreading sequence with chips `±1/sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCode {
    chips: Vec<f64>,
}

impl SpreadingCode {
    pub fn new(chips: Vec<f64>) -> Result<Self> {
        if chips.is_empty() {
            return Err(Error::param("N", "spreading gain must be at least 1"));
        }
        Ok(Self { chips })
    }

    pub fn chips(&self) -> &[f64] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }
}

/// Draws `k` random binary codes of length `n`.
pub fn generate_codes<R: Rng + ?Sized>(k: usize, n: usize, rng: &mut R) -> Result<Vec<SpreadingCode>> {
    if n == 0 {
        return Err(Error::param("N", "spreading gain must be at least 1"));
    }
    let amp = 1.0 / (n as f64).sqrt();
    Ok((0..k)
        .map(|_| SpreadingCode {
            chips: (0..n).map(|_| if rng.random::<bool>() { amp } else { -amp }).collect(),
        })
        .collect())
}

/// Convolution matrix of a code with an `L`-path channel, `M x L` with `M = N + L - 1`.
///
/// Column `l` holds the code delayed by `l` chips, so `C h` is the received
/// chip sequence of one symbol.
#[derive(Debug, Clone)]
pub struct SignatureMatrix {
    chips: Vec<f64>,
    paths: usize,
}

impl SignatureMatrix {
    pub fn new(code: &SpreadingCode, paths: usize) -> Result<Self> {
        if paths == 0 {
            return Err(Error::param("L", "at least one path is required"));
        }
        Ok(Self {
            chips: code.chips.clone(),
            paths,
        })
    }

    pub fn chips(&self) -> usize {
        self.chips.len()
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    /// Observation length `M = N + L - 1`.
    pub fn rows(&self) -> usize {
        self.chips.len() + self.paths - 1
    }

    pub fn matrix(&self) -> CMat {
        let (m, l) = (self.rows(), self.paths);
        CMat::from_fn(m, l, |i, j| {
            if i >= j && i - j < self.chips.len() {
                Complex64::new(self.chips[i - j], 0.0)
            } else {
                ZERO
            }
        })
    }

    /// `C h` without forming `C`.
    pub fn apply(&self, h: &[Complex64]) -> CVec {
        assert_eq!(h.len(), self.paths, "channel length mismatch");
        let mut out = CVec::zeros(self.rows());
        for (l, &g) in h.iter().enumerate() {
            for (n, &c) in self.chips.iter().enumerate() {
                out[n + l] += g * c;
            }
        }
        out
    }

    /// `C^H x` for an `M`-vector `x`.
    pub fn apply_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.rows(), "observation length mismatch");
        (0..self.paths)
            .map(|l| self.chips.iter().enumerate().map(|(n, &c)| x[n + l] * c).sum())
            .collect()
    }
}

/// Part of the previous symbol's waveform that leaks into the current window:
/// chips `N..M` moved to the start.
pub fn isi_tail(s: &CVec, n: usize) -> CVec {
    let m = s.len();
    let mut out = CVec::zeros(m);
    for t in n..m {
        out[t - n] = s[t];
    }
    out
}

/// Part of the next symbol's waveform that falls inside the current window:
/// chips `0..M-N` moved to the end.
pub fn isi_head(s: &CVec, n: usize) -> CVec {
    let m = s.len();
    let mut out = CVec::zeros(m);
    for t in n..m {
        out[t] = s[t - n];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn codes_have_unit_norm() {
        let mut rng = stream_rng(3, 0, Stream::Codes);
        for c in generate_codes(6, 16, &mut rng).unwrap() {
            let e: f64 = c.chips().iter().map(|x| x * x).sum();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn signature_shape_and_columns() {
        let code = SpreadingCode::new(vec![0.5, -0.5, 0.5, 0.5]).unwrap();
        let c = SignatureMatrix::new(&code, 3).unwrap().matrix();
        assert_eq!((c.nrows(), c.ncols()), (6, 3));
        for j in 0..3 {
            for i in 0..6 {
                let want = if i >= j && i - j < 4 { code.chips()[i - j] } else { 0.0 };
                assert_eq!(c[(i, j)].re, want);
            }
        }
    }

    #[test]
    fn apply_matches_matrix_product() {
        let mut rng = stream_rng(4, 0, Stream::Codes);
        let code = generate_codes(1, 8, &mut rng).unwrap().remove(0);
        let sig = SignatureMatrix::new(&code, 4).unwrap();
        let h: Vec<Complex64> = (0..4).map(|i| Complex64::new(i as f64 * 0.3, 1.0 - i as f64)).collect();
        let direct = sig.matrix() * CVec::from_vec(h.clone());
        assert!((direct - sig.apply(&h)).norm() < 1e-14);
        let x: Vec<Complex64> = (0..11).map(|i| Complex64::new(1.0, i as f64)).collect();
        let adj = sig.matrix().adjoint() * CVec::from_vec(x.clone());
        let fast = sig.apply_adjoint(&x);
        for l in 0..4 {
            assert!((adj[l] - fast[l]).norm() < 1e-12);
        }
    }

    #[test]
    fn isi_windows_tile_the_chip_stream() {
        // Three consecutive symbols: the window of the middle one must see the
        // tail of the first and the head of the last.
        let s = CVec::from_fn(7, |i, _| Complex64::new(i as f64 + 1.0, 0.0));
        let n = 4;
        let mut stream = vec![Complex64::new(0.0, 0.0); 3 * n + 3];
        for sym in 0..3 {
            for t in 0..7 {
                stream[sym * n + t] += s[t] * (sym as f64 + 1.0);
            }
        }
        let expect = s.clone() * Complex64::new(2.0, 0.0) + isi_tail(&s, n) + isi_head(&s, n) * Complex64::new(3.0, 0.0);
        for t in 0..7 {
            assert!((stream[n + t] - expect[t]).norm() < 1e-12);
        }
    }
}
