//! Versioned json files for schemes and channels.
//!
//! Both kinds share one layout: `matrices` holds every Kraus operator as
//! row-major `[re, im]` pairs, and `keyed_channels` lists, per role and per
//! key, the indices of a channel's Kraus operators in `matrices`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channels::KrausChannel;
use crate::constructions::aqecm_from_kraus;
use crate::error::{Error, Result};
use crate::qmath::{CMatrix, SpaceShape, C64};
use crate::schemes::{AqecmScheme, KeyDist};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixLiteral {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<SpaceShape>,
}

impl MatrixLiteral {
    pub fn from_matrix(m: &CMatrix) -> Self {
        MatrixLiteral { rows: m.rows(), cols: m.cols(), data: m.data().iter().map(|z| [z.re, z.im]).collect(), shape: None }
    }

    pub fn to_matrix(&self, location: &str) -> Result<CMatrix> {
        if self.data.len() != self.rows * self.cols {
            return Err(schema(location, format!("{} entries for a {}x{} matrix", self.data.len(), self.rows, self.cols)));
        }
        CMatrix::new(self.rows, self.cols, self.data.iter().map(|&[re, im]| C64::new(re, im)).collect())
    }
}

/// On-disk form of a scheme or a single channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeFile {
    pub schema: u32,
    pub kind: String,
    #[serde(default)]
    pub name: String,
    pub shapes: BTreeMap<String, SpaceShape>,
    #[serde(default)]
    pub key_dist: Vec<f64>,
    pub matrices: Vec<MatrixLiteral>,
    pub keyed_channels: BTreeMap<String, Vec<Vec<usize>>>,
}

fn schema(location: &str, message: impl Into<String>) -> Error {
    Error::Schema { location: location.to_string(), message: message.into() }
}

struct Store {
    matrices: Vec<MatrixLiteral>,
}

impl Store {
    fn push(&mut self, c: &KrausChannel) -> Vec<usize> {
        c.kraus_ops()
            .iter()
            .map(|k| {
                self.matrices.push(MatrixLiteral::from_matrix(k));
                self.matrices.len() - 1
            })
            .collect()
    }
}

impl SchemeFile {
    /// Dense Kraus form of every keyed channel of `s`.
    pub fn from_aqecm(s: &AqecmScheme, cap: usize) -> Result<Self> {
        let mut store = Store { matrices: Vec::new() };
        let n = s.keys().len();
        let mut enc = Vec::with_capacity(n);
        let mut dec = Vec::with_capacity(n);
        for k in 0..n {
            enc.push(store.push(&s.enc().get(k)?.to_kraus(cap)?));
            dec.push(store.push(&s.dec().get(k)?.to_kraus(cap)?));
        }
        let shapes =
            BTreeMap::from([("message".to_string(), s.msg_shape().clone()), ("cipher".to_string(), s.cipher_shape().clone())]);
        Ok(SchemeFile {
            schema: SCHEMA_VERSION,
            kind: "aqecm".into(),
            name: s.name().to_string(),
            shapes,
            key_dist: s.keys().probs().to_vec(),
            matrices: store.matrices,
            keyed_channels: BTreeMap::from([("enc".to_string(), enc), ("dec".to_string(), dec)]),
        })
    }

    pub fn from_channel(c: &KrausChannel) -> Self {
        let mut store = Store { matrices: Vec::new() };
        let idx = store.push(c);
        SchemeFile {
            schema: SCHEMA_VERSION,
            kind: "channel".into(),
            name: String::new(),
            shapes: BTreeMap::from([("input".to_string(), c.in_shape().clone()), ("output".to_string(), c.out_shape().clone())]),
            key_dist: Vec::new(),
            matrices: store.matrices,
            keyed_channels: BTreeMap::from([("kraus".to_string(), vec![idx])]),
        }
    }

    fn check_header(&self, kind: &str) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(schema("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema)));
        }
        if self.kind != kind {
            return Err(schema("kind", format!("expected {kind:?}, got {:?}", self.kind)));
        }
        Ok(())
    }

    fn shape(&self, name: &str) -> Result<SpaceShape> {
        self.shapes.get(name).cloned().ok_or_else(|| schema(&format!("shapes.{name}"), "missing"))
    }

    fn channel(&self, role: &str, key: usize, input: &SpaceShape, output: &SpaceShape) -> Result<KrausChannel> {
        let loc = format!("keyed_channels.{role}[{key}]");
        let idx = self.keyed_channels.get(role).and_then(|v| v.get(key)).ok_or_else(|| schema(&loc, "missing"))?;
        if idx.is_empty() {
            return Err(schema(&loc, "empty Kraus list"));
        }
        let ops = idx
            .iter()
            .map(|&i| {
                let m = self.matrices.get(i).ok_or_else(|| schema(&loc, format!("matrix index {i} out of range")))?;
                m.to_matrix(&format!("matrices[{i}]"))
            })
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::validated(ops, input.clone(), output.clone()).map_err(|e| schema(&loc, e.to_string()))
    }

    pub fn to_aqecm(&self) -> Result<AqecmScheme> {
        self.check_header("aqecm")?;
        let msg = self.shape("message")?;
        let cipher = self.shape("cipher")?;
        let keys = KeyDist::new(self.key_dist.clone()).map_err(|e| schema("key_dist", e.to_string()))?;
        let mut out = msg.clone();
        out.push(crate::qmath::Factor::classical("F", 2));
        for role in ["enc", "dec"] {
            let n = self.keyed_channels.get(role).map_or(0, Vec::len);
            if n != keys.len() {
                return Err(schema(&format!("keyed_channels.{role}"), format!("{n} channels for {} keys", keys.len())));
            }
        }
        let enc = (0..keys.len()).map(|k| self.channel("enc", k, &msg, &cipher)).collect::<Result<Vec<_>>>()?;
        let dec = (0..keys.len()).map(|k| self.channel("dec", k, &cipher, &out)).collect::<Result<Vec<_>>>()?;
        aqecm_from_kraus(&self.name, keys, msg, cipher, enc, dec)
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        self.check_header("channel")?;
        self.channel("kraus", 0, &self.shape("input")?, &self.shape("output")?)
    }
}

pub fn save_scheme(s: &AqecmScheme, path: impl AsRef<Path>, cap: usize) -> Result<()> {
    fs::write(path, serde_json::to_vec(&SchemeFile::from_aqecm(s, cap)?)?)?;
    Ok(())
}

pub fn load_scheme(path: impl AsRef<Path>) -> Result<AqecmScheme> {
    let f: SchemeFile = serde_json::from_slice(&fs::read(path)?)?;
    f.to_aqecm()
}

pub fn save_channel(c: &KrausChannel, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, serde_json::to_vec(&SchemeFile::from_channel(c))?)?;
    Ok(())
}

pub fn load_channel(path: impl AsRef<Path>) -> Result<KrausChannel> {
    let f: SchemeFile = serde_json::from_slice(&fs::read(path)?)?;
    f.to_channel()
}
