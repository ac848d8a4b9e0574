use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoveltyBackend {
    /// QR of the neighbor matrix augmented with the center vector.
    Qr,
    /// Projection onto left singular vectors of the neighbor matrix.
    Svd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ImportanceMode {
    /// Variance weights applied to the fused word vectors.
    Variance,
    /// Variance weights applied to last-layer vectors, no layer fusion.
    LastLayer,
    /// Plain mean of fused word vectors.
    Uniform,
}

/// Every knob of the fusion pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Mix between inverse-alignment (1.0) and novelty (0.0) weights.
    pub omega: f64,
    /// Neighbor half-window `m`.
    pub window: usize,
    /// First layer that takes part in fusion.
    pub start_layer: usize,
    pub novelty: NoveltyBackend,
    pub importance: ImportanceMode,
    pub merge_subwords: bool,
    pub keep_special: bool,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            omega: 0.5,
            window: 2,
            start_layer: 4,
            novelty: NoveltyBackend::Qr,
            importance: ImportanceMode::Variance,
            merge_subwords: false,
            keep_special: false,
        }
    }
}

impl FusionConfig {
    /// Checks the configuration against a stack of `layer_count` layers.
    pub fn validate(&self, layer_count: usize) -> Result<()> {
        if !(self.omega.is_finite() && (0.0..=1.0).contains(&self.omega)) {
            return Err(Error::InvalidConfig(format!(
                "omega must lie in [0, 1], got {}",
                self.omega
            )));
        }
        if self.window == 0 {
            return Err(Error::InvalidConfig("window must be at least 1".into()));
        }
        if layer_count == 0 || self.start_layer >= layer_count {
            return Err(Error::InvalidConfig(format!(
                "start layer {} is outside a {layer_count}-layer stack",
                self.start_layer
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = FusionConfig::default();
        assert_eq!((c.omega, c.window, c.start_layer), (0.5, 2, 4));
        assert_eq!(c.novelty, NoveltyBackend::Qr);
        assert!(c.validate(13).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        let base = FusionConfig::default();
        for bad in [
            FusionConfig { omega: 1.5, ..base },
            FusionConfig {
                omega: f64::NAN,
                ..base
            },
            FusionConfig { window: 0, ..base },
            FusionConfig {
                start_layer: 13,
                ..base
            },
        ] {
            assert!(matches!(bad.validate(13), Err(Error::InvalidConfig(_))));
        }
        assert!(FusionConfig {
            start_layer: 12,
            ..base
        }
        .validate(13)
        .is_ok());
    }

    #[test]
    fn serde_names() {
        let s = serde_json::to_string(&FusionConfig::default()).unwrap();
        assert!(s.contains("\"novelty\":\"qr\""));
        assert!(s.contains("\"importance\":\"variance\""));
        let l: ImportanceMode = serde_json::from_str("\"last-layer\"").unwrap();
        assert_eq!(l, ImportanceMode::LastLayer);
    }
}
