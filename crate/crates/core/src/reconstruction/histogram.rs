use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Photon-number bins per phase used for the measured distributions.
pub const DEFAULT_BINS: usize = 35;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HistogramNote {
    /// Fewer than ten records per bin.
    FewRecords { records: usize, bins: usize },
    /// Every record fell at or below the dark level.
    AllBelowDark,
}

/// Dark-corrected photon-number histogram at one phase. `density` is
/// normalized over `N` (integrates to one).
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonHistogram<T> {
    pub phase: T,
    pub edges: Vec<T>,
    pub counts: Vec<u64>,
    pub density: Vec<T>,
    pub notes: Vec<HistogramNote>,
}

impl<T: Real> PhotonHistogram<T> {
    /// Histogram from a tabulated density over `N` (no counts), normalized
    /// to unit mass.
    pub fn from_density(phase: T, edges: Vec<T>, density: Vec<T>) -> Result<Self> {
        if edges.len() != density.len() + 1 || density.is_empty() {
            return Err(Error::invalid("edges", "need one more edge than density values"));
        }
        if edges.windows(2).any(|w| !(w[1] > w[0])) || edges[0] < T::zero() {
            return Err(Error::invalid("edges", "must be non-negative and increasing"));
        }
        let mut h = Self {
            phase,
            edges,
            counts: Vec::new(),
            density,
            notes: Vec::new(),
        };
        let total = h.integral();
        if !(total > T::zero()) {
            return Err(Error::Empty("photon-number density has no mass"));
        }
        h.density.iter_mut().for_each(|d| *d = *d / total);
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.density.len()
    }

    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<T> {
        let total = self.total();
        if total > 0 {
            let t = T::lit(total as f64);
            self.counts.iter().map(|&c| T::lit(c as f64) / t).collect()
        } else {
            self.density.iter().zip(self.widths()).map(|(d, w)| *d * w).collect()
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<T> {
        self.edges.windows(2).map(|w| (w[0] + w[1]) * T::lit(0.5)).collect()
    }

    pub fn widths(&self) -> Vec<T> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `Σ density·width`.
    pub fn integral(&self) -> T {
        self.density.iter().zip(self.widths()).map(|(d, w)| *d * w).sum()
    }
}

/// Bin dark-corrected photon numbers into `bins` uniform bins on `[0, max]`.
///
/// `dark_mean` is subtracted from every record and negatives are clamped to
/// zero; detector noise is not deconvolved.
pub fn histogram_photons<T: Real>(records: &[T], phase: T, bins: usize, dark_mean: T) -> Result<PhotonHistogram<T>> {
    if records.is_empty() {
        return Err(Error::Empty("no photon-number records"));
    }
    if bins == 0 {
        return Err(Error::invalid("bins", "must be >= 1"));
    }
    let mut notes = Vec::new();
    if records.len() < bins * 10 {
        log::warn!("{} records for {} bins; histogram will be noisy", records.len(), bins);
        notes.push(HistogramNote::FewRecords {
            records: records.len(),
            bins,
        });
    }
    let corrected: Vec<T> = records.iter().map(|&n| (n - dark_mean).max(T::zero())).collect();
    let max = corrected.iter().copied().fold(T::zero(), T::max);
    let mut counts = vec![0u64; bins];
    let edges: Vec<T>;
    if max > T::zero() {
        edges = (0..=bins)
            .map(|k| {
                if k == bins {
                    max
                } else {
                    max * T::from_usize_lossy(k) / T::from_usize_lossy(bins)
                }
            })
            .collect();
        let scale = T::from_usize_lossy(bins) / max;
        for &n in &corrected {
            let k = (n * scale).floor().to_usize().unwrap_or(0).min(bins - 1);
            counts[k] += 1;
        }
    } else {
        log::warn!("all records at or below the dark level; all mass in bin 0");
        notes.push(HistogramNote::AllBelowDark);
        // unit-width bins so the density stays finite
        edges = (0..=bins).map(T::from_usize_lossy).collect();
        counts[0] = corrected.len() as u64;
    }
    let total = T::from_usize_lossy(corrected.len());
    let density = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| T::lit(c as f64) / (total * (w[1] - w[0])))
        .collect();
    Ok(PhotonHistogram {
        phase,
        edges,
        counts,
        density,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_records_fill_one_bin() {
        let recs = vec![50.0_f64; 8000];
        let h = histogram_photons(&recs, 0.0, 35, 2.0).unwrap();
        let occupied: Vec<usize> = (0..35).filter(|&k| h.counts[k] > 0).collect();
        assert_eq!(occupied.len(), 1);
        let k = occupied[0];
        assert!(h.edges[k] <= 48.0 && 48.0 <= h.edges[k + 1]);
        assert_eq!(h.counts[k], 8000);
        assert!((h.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn records_below_dark_go_to_bin_zero() {
        let recs = vec![0.5_f64, 1.0, 1.9, 0.0];
        let h = histogram_photons(&recs, 0.0, 35, 2.0).unwrap();
        assert_eq!(h.counts[0], 4);
        assert!(h.notes.contains(&HistogramNote::AllBelowDark));
        assert!((h.integral() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(histogram_photons::<f64>(&[], 0.0, 35, 2.0).is_err());
    }

    #[test]
    fn counts_sum_to_shots() {
        let recs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37) % 91.0).collect();
        let h = histogram_photons(&recs, 0.2, 35, 0.0).unwrap();
        assert_eq!(h.total(), 1000);
        assert_eq!(h.bins(), 35);
        assert!((h.integral() - 1.0).abs() < 1e-6);
    }
}
