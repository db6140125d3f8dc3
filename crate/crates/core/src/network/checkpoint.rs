//! JSON checkpoints: `{format_version: 1, config, parameters}`.
//!
//! Floats are written in shortest round-trip form and parsed exactly, so a
//! save/load cycle reproduces every parameter bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::network::config::ModelConfig;
use crate::network::model::Model;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayerParameters {
    /// Index into `config.layers`.
    pub layer: usize,
    pub weight: Matrix,
    pub bias: Matrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub config: ModelConfig,
    pub parameters: Vec<LayerParameters>,
}

impl Checkpoint {
    pub fn from_model(model: &Model) -> Self {
        let config = model.config().clone();
        let param_layers = config
            .layers
            .iter()
            .enumerate()
            .filter(|(_, l)| !matches!(l, crate::network::LayerSpec::Dropout { .. }))
            .map(|(i, _)| i);
        let params = model.parameters();
        let parameters = param_layers
            .zip(params.chunks(2))
            .map(|(layer, wb)| LayerParameters {
                layer,
                weight: wb[0].clone(),
                bias: wb[1].clone(),
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            config,
            parameters,
        }
    }

    pub fn into_model(self) -> Result<Model> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::config(format!(
                "unsupported checkpoint format_version {}",
                self.format_version
            )));
        }
        let params = self
            .parameters
            .into_iter()
            .flat_map(|p| [p.weight, p.bias])
            .collect();
        Model::from_parameters(self.config, params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serialises")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        Self::from_json(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Baseline, ModelConfig, SwagShape};
    use crate::rng::Rng;

    fn bits(model: &Model) -> Vec<u64> {
        model
            .parameters()
            .iter()
            .flat_map(|m| m.data().iter().map(|x| x.to_bits()))
            .collect()
    }

    #[test]
    fn swag_round_trip_is_bitwise() {
        let cfg = ModelConfig::swag("f", 1, SwagShape::FUNCTION);
        let model = Model::build(cfg, &mut Rng::new(11)).unwrap();
        let json = Checkpoint::from_model(&model).to_json();
        let back = Checkpoint::from_json(&json).unwrap().into_model().unwrap();
        assert_eq!(bits(&model), bits(&back));
        assert_eq!(back.config(), model.config());
    }

    #[test]
    fn baseline_with_dropout_round_trips() {
        let model = Model::build(Baseline::C.config(), &mut Rng::new(5)).unwrap();
        let ck = Checkpoint::from_model(&model);
        assert_eq!(ck.parameters.len(), 10);
        assert_eq!(ck.parameters[8].layer, 9);
        let back = ck.into_model().unwrap();
        assert_eq!(bits(&model), bits(&back));
    }

    #[test]
    fn rejects_wrong_version_and_shapes() {
        let model = Model::build(Baseline::D.config(), &mut Rng::new(5)).unwrap();
        let mut ck = Checkpoint::from_model(&model);
        ck.format_version = 2;
        assert!(ck.clone().into_model().is_err());
        ck.format_version = FORMAT_VERSION;
        ck.parameters[0].bias = Matrix::zeros(3, 1);
        assert!(ck.into_model().is_err());
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.json");
        let model = Model::build(Baseline::A.config(), &mut Rng::new(1)).unwrap();
        Checkpoint::from_model(&model).save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap().into_model().unwrap();
        assert_eq!(bits(&model), bits(&back));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn arbitrary_floats_survive(values in prop::collection::vec(
                prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 4)) {
                let cfg = ModelConfig::swag("p", 1, SwagShape {
                    degree: 2, width: 1, blocks: 1, hidden: 0, output_dim: 1,
                    output_activation: crate::activation::Activation::Linear,
                });
                let params = vec![
                    Matrix::column(&values[0..2]),
                    Matrix::column(&values[2..4]),
                    Matrix::row_vector(&values[0..2]),
                    Matrix::column(&values[3..4]),
                ];
                let model = Model::from_parameters(cfg, params).unwrap();
                let back = Checkpoint::from_json(&Checkpoint::from_model(&model).to_json())
                    .unwrap().into_model().unwrap();
                prop_assert_eq!(bits(&model), bits(&back));
            }
        }
    }
}
