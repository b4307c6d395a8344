//! `sae_model.json` and `training_log.csv`.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use super::network::{Activation, Dense};
use super::train::{EpochRecord, Phase, TrainingLog};
use super::{SaeConfig, SaeModel};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerFile {
    input: usize,
    output: usize,
    activation: Activation,
    /// Row-major `input × output`.
    weights: Vec<f64>,
    bias: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    config: SaeConfig,
    encoder: Vec<LayerFile>,
    decoder: Vec<LayerFile>,
}

impl From<&Dense> for LayerFile {
    fn from(layer: &Dense) -> Self {
        Self {
            input: layer.input_dim(),
            output: layer.output_dim(),
            activation: layer.activation,
            weights: layer.weights.iter().copied().collect(),
            bias: layer.bias.to_vec(),
        }
    }
}

impl TryFrom<LayerFile> for Dense {
    type Error = Error;

    fn try_from(file: LayerFile) -> Result<Self> {
        let weights = Array2::from_shape_vec((file.input, file.output), file.weights)
            .map_err(|e| Error::Invalid(format!("layer {}x{} weights: {e}", file.input, file.output)))?;
        if file.bias.len() != file.output {
            return Err(Error::Dimension {
                context: "layer bias".into(),
                expected: file.output,
                found: file.bias.len(),
            });
        }
        Ok(Dense {
            weights,
            bias: Array1::from(file.bias),
            activation: file.activation,
        })
    }
}

impl SaeModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            config: self.config.clone(),
            encoder: self.encoder.iter().map(LayerFile::from).collect(),
            decoder: self.decoder.iter().map(LayerFile::from).collect(),
        };
        serde_json::to_string(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        let convert = |layers: Vec<LayerFile>| layers.into_iter().map(Dense::try_from).collect::<Result<Vec<_>>>();
        let model = SaeModel {
            config: file.config,
            encoder: convert(file.encoder)?,
            decoder: convert(file.decoder)?,
        };
        model.validate()?;
        Ok(model)
    }
}

pub fn write_training_log<W: Write>(writer: W, log: &TrainingLog) -> Result<()> {
    let mut csv = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    let io_err = |e: csv::Error| Error::Invalid(format!("writing training log: {e}"));
    csv.write_record(["phase", "epoch", "loss", "accuracy"])
        .map_err(io_err)?;
    for phase in &log.phases {
        for r in &phase.epochs {
            csv.write_record([
                phase.name.clone(),
                r.epoch.to_string(),
                r.loss.to_string(),
                r.accuracy.to_string(),
            ])
            .map_err(io_err)?;
        }
    }
    csv.flush()
        .map_err(|e| Error::Invalid(format!("writing training log: {e}")))?;
    Ok(())
}

pub fn read_training_log<R: BufRead>(reader: R) -> Result<TrainingLog> {
    let mut csv = csv::ReaderBuilder::new().from_reader(reader);
    let headers = csv.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if headers != vec!["phase", "epoch", "loss", "accuracy"] {
        return Err(Error::Parse {
            line: 1,
            message: "header must be phase,epoch,loss,accuracy".into(),
        });
    }
    let mut log = TrainingLog::default();
    for (i, row) in csv.records().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let field = |k: usize| row.get(k).unwrap_or("");
        let num = |k: usize| {
            field(k).parse::<f64>().map_err(|e| Error::Parse {
                line,
                message: format!("column {k}: {e}"),
            })
        };
        let epoch: usize = field(1).parse().map_err(|e| Error::Parse {
            line,
            message: format!("epoch: {e}"),
        })?;
        let record = EpochRecord {
            epoch,
            loss: num(2)?,
            accuracy: num(3)?,
        };
        if !(record.loss.is_finite() && record.loss >= 0.0) || !(0.0..=1.0).contains(&record.accuracy) {
            return Err(Error::Parse {
                line,
                message: "loss must be finite and non-negative, accuracy in [0, 1]".into(),
            });
        }
        match log.phases.last_mut() {
            Some(phase) if phase.name == field(0) => phase.epochs.push(record),
            _ => log.phases.push(Phase {
                name: field(0).to_string(),
                epochs: vec![record],
            }),
        }
    }
    Ok(log)
}
