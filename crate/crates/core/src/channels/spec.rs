//! JSON description of noise.
//!
//! ```json
//! {"dim": 2, "type": "kraus", "kraus": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]]]}
//! {"dim": 4, "type": "depolarizing", "p": 0.9}
//! {"dim": 16, "type": "dephasing", "q": 0.25}
//! {"dim": 2, "type": "amplitude_damping", "gamma": 0.3}
//! {"dim": 2, "type": "unitary", "matrix": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}
//! {"dim": 2, "type": "lindblad", "epsilon": 0.01, "jumps": [...], "hamiltonian": [...]}
//! ```
//!
//! Matrices are arrays of rows, each entry a `[re, im]` pair. `dephasing` and
//! `amplitude_damping` act independently on every qubit, so `dim` must be a
//! power of two.

use serde::{Deserialize, Serialize};

use super::{Channel, LindbladGenerator};
use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Rows of `[re, im]` pairs.
pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub dim: usize,
    #[serde(flatten)]
    pub kind: ChannelKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelKind {
    Kraus {
        kraus: Vec<JsonMatrix>,
    },
    Depolarizing {
        p: f64,
    },
    Dephasing {
        q: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    Unitary {
        matrix: JsonMatrix,
    },
    Lindblad {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hamiltonian: Option<JsonMatrix>,
        #[serde(default)]
        jumps: Vec<JsonMatrix>,
        epsilon: f64,
    },
}

/// Either a discrete channel or a continuous-time generator.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseModel {
    Channel(Channel),
    Lindblad(LindbladGenerator),
}

impl NoiseModel {
    pub fn dim(&self) -> usize {
        match self {
            NoiseModel::Channel(c) => c.dim(),
            NoiseModel::Lindblad(g) => g.dim(),
        }
    }
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.rows()).map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let nested: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&[re, im]| C64::new(re, im)).collect()).collect();
    CMatrix::from_rows(&nested)
}

impl ChannelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("channel spec serializes")
    }

    pub fn is_lindblad(&self) -> bool {
        matches!(self.kind, ChannelKind::Lindblad { .. })
    }

    fn check_dim(&self, m: &CMatrix, what: &str) -> Result<()> {
        if m.rows() == self.dim && m.cols() == self.dim {
            Ok(())
        } else {
            Err(Error::Config(format!("{what} is {}x{}, expected {}x{}", m.rows(), m.cols(), self.dim, self.dim)))
        }
    }

    pub fn build(&self) -> Result<NoiseModel> {
        if self.dim < 2 {
            return Err(Error::Config(format!("dim must be at least 2, got {}", self.dim)));
        }
        let ch = match &self.kind {
            ChannelKind::Kraus { kraus } => {
                let ops = kraus.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                for a in &ops {
                    self.check_dim(a, "Kraus operator")?;
                }
                Channel::from_kraus(ops)?
            }
            ChannelKind::Depolarizing { p } => Channel::depolarizing(self.dim, *p)?,
            ChannelKind::Dephasing { q } => Channel::dephasing(self.dim, *q)?,
            ChannelKind::AmplitudeDamping { gamma } => Channel::amplitude_damping(self.dim, *gamma)?,
            ChannelKind::Unitary { matrix } => {
                let u = matrix_from_json(matrix)?;
                self.check_dim(&u, "unitary")?;
                Channel::unitary(u)?
            }
            ChannelKind::Lindblad { hamiltonian, jumps, epsilon } => {
                let h = match hamiltonian {
                    Some(h) => matrix_from_json(h)?,
                    None => CMatrix::zeros(self.dim, self.dim),
                };
                self.check_dim(&h, "hamiltonian")?;
                let vs = jumps.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
                for v in &vs {
                    self.check_dim(v, "jump operator")?;
                }
                return Ok(NoiseModel::Lindblad(LindbladGenerator::new(h, vs, *epsilon)?));
            }
        };
        Ok(NoiseModel::Channel(ch))
    }

    pub fn build_channel(&self) -> Result<Channel> {
        match self.build()? {
            NoiseModel::Channel(c) => Ok(c),
            NoiseModel::Lindblad(_) => Err(Error::Config("expected a discrete channel, found `lindblad`".into())),
        }
    }

    pub fn build_lindblad(&self) -> Result<LindbladGenerator> {
        match self.build()? {
            NoiseModel::Lindblad(g) => Ok(g),
            NoiseModel::Channel(_) => Err(Error::Config("expected a `lindblad` noise description".into())),
        }
    }

    pub fn kraus(ops: &[CMatrix]) -> Self {
        Self { dim: ops[0].rows(), kind: ChannelKind::Kraus { kraus: ops.iter().map(matrix_to_json).collect() } }
    }
}
