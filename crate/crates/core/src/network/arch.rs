use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Identity,
}

/// Shape of a spectral transposed convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransposedShape {
    pub in_features: usize,
    pub out_features: usize,
    pub kernel_len: usize,
    pub stride: usize,
    pub pad: usize,
}

/// Shape of a stride-1, length-preserving spectral convolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvShape {
    pub in_features: usize,
    pub out_features: usize,
    pub kernel_len: usize,
    pub pad: usize,
}

/// Layer layout of the two-phase per-pixel network.
///
/// The RGB triple enters as one feature of length `input_bands`. The upscaling
/// phase is a stack of transposed convolutions followed by `fuse_conv`, which
/// must produce one feature of length `output_bands` (the low-frequency
/// estimate). The HRE block maps that estimate to a residual of the same
/// shape; the network output is their sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchitectureSpec {
    pub input_bands: usize,
    pub output_bands: usize,
    pub upscale_layers: Vec<TransposedShape>,
    pub fuse_conv: ConvShape,
    pub hre_convs: Vec<ConvShape>,
    pub activation: Activation,
}

impl Default for ArchitectureSpec {
    fn default() -> Self {
        Self::with_width(32)
    }
}

impl ArchitectureSpec {
    /// The default layout (3 -> 6 -> 12 -> 24) with `width` hidden features.
    pub fn with_width(width: usize) -> Self {
        let up = |i, o| TransposedShape {
            in_features: i,
            out_features: o,
            kernel_len: 4,
            stride: 2,
            pad: 1,
        };
        let conv = |i, o| ConvShape {
            in_features: i,
            out_features: o,
            kernel_len: 3,
            pad: 1,
        };
        Self {
            input_bands: 3,
            output_bands: 24,
            upscale_layers: vec![up(1, width), up(width, width), up(width, width)],
            fuse_conv: conv(width, 1),
            hre_convs: vec![conv(1, width), conv(width, width), conv(width, 1)],
            activation: Activation::Relu,
        }
    }

    pub fn identity_activation(mut self) -> Self {
        self.activation = Activation::Identity;
        self
    }

    /// Checks feature chaining and the spectral length algebra.
    pub fn validate(&self) -> Result<()> {
        self.layers().map(|_| ())
    }

    /// Flattened layer list in evaluation order: upscale layers, fuse conv, HRE convs.
    pub fn layers(&self) -> Result<Vec<LayerGeom>> {
        if self.input_bands == 0 || self.output_bands == 0 {
            return Err(Error::Spec("band counts must be positive".into()));
        }
        if self.hre_convs.is_empty() {
            return Err(Error::Spec("the HRE block needs at least one convolution".into()));
        }
        let relu = self.activation == Activation::Relu;
        let mut layers = Vec::new();
        let mut features = 1;
        let mut len = self.input_bands;

        for (n, t) in self.upscale_layers.iter().enumerate() {
            let name = format!("upscale[{n}]");
            if t.in_features != features {
                return Err(Error::Spec(format!(
                    "{name} expects {} input features, previous layer gives {features}",
                    t.in_features
                )));
            }
            if t.stride == 0 || t.kernel_len == 0 || t.out_features == 0 {
                return Err(Error::Spec(format!("{name} has a zero stride, kernel or width")));
            }
            let out_len = (len as isize - 1) * t.stride as isize - 2 * t.pad as isize
                + t.kernel_len as isize;
            if out_len < 1 {
                return Err(Error::Spec(format!("{name} produces length {out_len}")));
            }
            layers.push(LayerGeom {
                kind: LayerKind::Transposed,
                in_features: t.in_features,
                out_features: t.out_features,
                kernel_len: t.kernel_len,
                stride: t.stride,
                pad: t.pad,
                in_len: len,
                out_len: out_len as usize,
                relu,
            });
            features = t.out_features;
            len = out_len as usize;
        }

        let mut push_conv = |c: &ConvShape, name: String, features: &mut usize, relu: bool| {
            if c.in_features != *features {
                return Err(Error::Spec(format!(
                    "{name} expects {} input features, previous layer gives {features}",
                    c.in_features
                )));
            }
            if c.kernel_len.is_multiple_of(2) {
                return Err(Error::Spec(format!("{name} kernel length {} is even", c.kernel_len)));
            }
            if c.pad != (c.kernel_len - 1) / 2 {
                return Err(Error::Spec(format!(
                    "{name} pad {} does not preserve length for kernel {}",
                    c.pad, c.kernel_len
                )));
            }
            if c.out_features == 0 {
                return Err(Error::Spec(format!("{name} has zero width")));
            }
            layers.push(LayerGeom {
                kind: LayerKind::Conv,
                in_features: c.in_features,
                out_features: c.out_features,
                kernel_len: c.kernel_len,
                stride: 1,
                pad: c.pad,
                in_len: len,
                out_len: len,
                relu,
            });
            *features = c.out_features;
            Ok(())
        };

        push_conv(&self.fuse_conv, "fuse_conv".into(), &mut features, false)?;
        if features != 1 || len != self.output_bands {
            return Err(Error::Spec(format!(
                "upscaling phase yields {features} feature(s) of length {len}, expected 1 of length {}",
                self.output_bands
            )));
        }
        let last = self.hre_convs.len() - 1;
        for (n, c) in self.hre_convs.iter().enumerate() {
            push_conv(c, format!("hre[{n}]"), &mut features, relu && n != last)?;
        }
        if features != 1 {
            return Err(Error::Spec(format!("HRE block ends with {features} features, expected 1")));
        }
        Ok(layers)
    }

    /// Spectral length after each layer, starting with the input length.
    pub fn spectral_lengths(&self) -> Result<Vec<usize>> {
        let layers = self.layers()?;
        Ok(std::iter::once(self.input_bands)
            .chain(layers.iter().map(|l| l.out_len))
            .collect())
    }

    /// Index of the fuse conv in [`ArchitectureSpec::layers`].
    pub fn fuse_index(&self) -> usize {
        self.upscale_layers.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LayerKind {
    Transposed,
    Conv,
}

/// Resolved geometry of one layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerGeom {
    pub kind: LayerKind,
    pub in_features: usize,
    pub out_features: usize,
    pub kernel_len: usize,
    pub stride: usize,
    pub pad: usize,
    pub in_len: usize,
    pub out_len: usize,
    pub relu: bool,
}

impl LayerGeom {
    pub fn weight_count(&self) -> usize {
        self.out_features * self.in_features * self.kernel_len
    }

    pub fn input_size(&self) -> usize {
        self.in_features * self.in_len
    }

    pub fn output_size(&self) -> usize {
        self.out_features * self.out_len
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_lengths_compose() {
        let spec = ArchitectureSpec::default();
        assert_eq!(spec.spectral_lengths().unwrap(), vec![3, 6, 12, 24, 24, 24, 24, 24]);
    }

    #[test]
    fn relu_placement() {
        let relu: Vec<bool> = ArchitectureSpec::default()
            .layers()
            .unwrap()
            .iter()
            .map(|l| l.relu)
            .collect();
        assert_eq!(relu, vec![true, true, true, false, true, true, false]);
        let lin = ArchitectureSpec::default().identity_activation();
        assert!(lin.layers().unwrap().iter().all(|l| !l.relu));
    }

    #[test]
    fn wrong_output_length_rejected() {
        let spec = ArchitectureSpec {
            output_bands: 27,
            ..ArchitectureSpec::default()
        };
        assert!(matches!(spec.validate(), Err(Error::Spec(_))));
    }

    #[test]
    fn even_conv_kernel_rejected() {
        let mut spec = ArchitectureSpec::default();
        spec.hre_convs[1].kernel_len = 4;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn feature_chain_checked() {
        let mut spec = ArchitectureSpec::default();
        spec.upscale_layers[1].in_features = 16;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn serde_round_trip() {
        let spec = ArchitectureSpec::default();
        let json = serde_json::to_string(&spec).unwrap();
        assert!(json.contains("\"relu\""));
        assert_eq!(serde_json::from_str::<ArchitectureSpec>(&json).unwrap(), spec);
    }
}
