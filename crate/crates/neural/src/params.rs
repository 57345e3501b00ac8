//! Named parameter tensors with gradients and Adam state.
//!
//! Initialization is a pure function of (name, shape, seed): re-creating a
//! store with the same seed reproduces every tensor bit for bit.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u32),
    #[error("parameter {name}: checkpoint shape {found:?} does not match {expected:?}")]
    ShapeMismatch {
        name: String,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("checkpoint header is not valid utf-8/json")]
    BadHeader,
}

pub struct Param {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
    pub grad: Vec<f64>,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Param {
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }
}

#[derive(Clone, Copy)]
pub enum Init {
    /// Uniform in ±1/sqrt(fan_in); fan_in = cols.
    FanIn,
    /// Uniform in ±gain/sqrt(fan_in); recurrent stacks use a gain above one
    /// to keep signal differences alive through the layers.
    ScaledFanIn(f64),
    Zeros,
    /// Zeros, except the given column range is set to 1 (forget-gate bias).
    ZerosWithOnes(usize, usize),
    /// Uniform in ±scale.
    Uniform(f64),
}

pub struct ParameterStore {
    params: Vec<Param>,
    by_name: BTreeMap<String, ParamId>,
    pub seed: u64,
}

impl ParameterStore {
    pub fn new(seed: u64) -> ParameterStore {
        ParameterStore {
            params: Vec::new(),
            by_name: BTreeMap::new(),
            seed,
        }
    }

    pub fn get_or_init(&mut self, name: &str, rows: usize, cols: usize, init: Init) -> ParamId {
        if let Some(&id) = self.by_name.get(name) {
            let p = &self.params[id.0];
            assert_eq!(
                (p.rows, p.cols),
                (rows, cols),
                "parameter {name} re-declared with a different shape"
            );
            return id;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ fnv(name));
        let n = rows * cols;
        let data = match init {
            Init::FanIn => {
                let scale = 1.0 / (cols as f64).sqrt();
                (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
            }
            Init::ScaledFanIn(gain) => {
                let scale = gain / (cols as f64).sqrt();
                (0..n).map(|_| rng.gen_range(-scale..scale)).collect()
            }
            Init::Zeros => vec![0.0; n],
            Init::ZerosWithOnes(start, len) => {
                let mut d = vec![0.0; n];
                d[start..start + len].iter_mut().for_each(|x| *x = 1.0);
                d
            }
            Init::Uniform(scale) => (0..n).map(|_| rng.gen_range(-scale..scale)).collect(),
        };
        let id = ParamId(self.params.len());
        self.params.push(Param {
            name: name.to_string(),
            rows,
            cols,
            data,
            grad: vec![0.0; n],
            m: vec![0.0; n],
            v: vec![0.0; n],
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    /// Initialize a parameter with explicit values (embedding rows etc).
    pub fn set_values(&mut self, id: ParamId, values: &[f64]) {
        assert_eq!(values.len(), self.params[id.0].len());
        self.params[id.0].data.copy_from_slice(values);
    }

    pub fn set_row(&mut self, id: ParamId, row: usize, values: &[f64]) {
        let p = &mut self.params[id.0];
        assert_eq!(values.len(), p.cols);
        p.data[row * p.cols..(row + 1) * p.cols].copy_from_slice(values);
    }

    pub fn get(&self, id: ParamId) -> &Param {
        &self.params[id.0]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Param {
        &mut self.params[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Param> {
        self.params.iter()
    }

    pub fn id_at(&self, index: usize) -> ParamId {
        assert!(index < self.params.len());
        ParamId(index)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.len()).sum()
    }

    pub fn zero_grads(&mut self) {
        for p in &mut self.params {
            p.grad.iter_mut().for_each(|g| *g = 0.0);
        }
    }

    pub fn grad_global_norm(&self) -> f64 {
        self.params
            .iter()
            .flat_map(|p| p.grad.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale_grads(&mut self, factor: f64) {
        for p in &mut self.params {
            p.grad.iter_mut().for_each(|g| *g *= factor);
        }
    }

    /// One Adam update over every parameter; `t` is the 1-based step count.
    pub fn adam_step(&mut self, t: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) {
        let bc1 = 1.0 - beta1.powi(t as i32);
        let bc2 = 1.0 - beta2.powi(t as i32);
        for p in &mut self.params {
            for i in 0..p.data.len() {
                let g = p.grad[i];
                p.m[i] = beta1 * p.m[i] + (1.0 - beta1) * g;
                p.v[i] = beta2 * p.v[i] + (1.0 - beta2) * g * g;
                let mhat = p.m[i] / bc1;
                let vhat = p.v[i] / bc2;
                p.data[i] -= lr * mhat / (vhat.sqrt() + eps);
            }
        }
    }

    /// Write `magic | version | header json | params` to disk.
    pub fn save(&self, path: &Path, header_json: &str) -> Result<(), CheckpointError> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(b"SNLCKPT1")?;
        write_u32(&mut f, 1)?;
        let hb = header_json.as_bytes();
        write_u32(&mut f, hb.len() as u32)?;
        f.write_all(hb)?;
        write_u32(&mut f, self.params.len() as u32)?;
        for p in &self.params {
            let nb = p.name.as_bytes();
            write_u32(&mut f, nb.len() as u32)?;
            f.write_all(nb)?;
            write_u32(&mut f, p.rows as u32)?;
            write_u32(&mut f, p.cols as u32)?;
            for x in &p.data {
                f.write_all(&x.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Load values into this store. Every checkpointed parameter must
    /// already exist here with an identical shape.
    pub fn load(&mut self, path: &Path) -> Result<String, CheckpointError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != b"SNLCKPT1" {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut f)?;
        if version != 1 {
            return Err(CheckpointError::BadVersion(version));
        }
        let hlen = read_u32(&mut f)? as usize;
        let mut hb = vec![0u8; hlen];
        f.read_exact(&mut hb)?;
        let header = String::from_utf8(hb).map_err(|_| CheckpointError::BadHeader)?;
        let count = read_u32(&mut f)? as usize;
        for _ in 0..count {
            let nlen = read_u32(&mut f)? as usize;
            let mut nb = vec![0u8; nlen];
            f.read_exact(&mut nb)?;
            let name = String::from_utf8(nb).map_err(|_| CheckpointError::BadHeader)?;
            let rows = read_u32(&mut f)? as usize;
            let cols = read_u32(&mut f)? as usize;
            let id = self.by_name.get(&name).copied().ok_or_else(|| {
                CheckpointError::ShapeMismatch {
                    name: name.clone(),
                    expected: (0, 0),
                    found: (rows, cols),
                }
            })?;
            let p = &mut self.params[id.0];
            if (p.rows, p.cols) != (rows, cols) {
                return Err(CheckpointError::ShapeMismatch {
                    name,
                    expected: (p.rows, p.cols),
                    found: (rows, cols),
                });
            }
            let mut buf = [0u8; 8];
            for i in 0..p.data.len() {
                f.read_exact(&mut buf)?;
                p.data[i] = f64::from_le_bytes(buf);
            }
        }
        Ok(header)
    }

    /// Read just the header json of a checkpoint.
    pub fn read_header(path: &Path) -> Result<String, CheckpointError> {
        let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        if &magic != b"SNLCKPT1" {
            return Err(CheckpointError::BadMagic);
        }
        let version = read_u32(&mut f)?;
        if version != 1 {
            return Err(CheckpointError::BadVersion(version));
        }
        let hlen = read_u32(&mut f)? as usize;
        let mut hb = vec![0u8; hlen];
        f.read_exact(&mut hb)?;
        String::from_utf8(hb).map_err(|_| CheckpointError::BadHeader)
    }
}

fn fnv(s: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn write_u32<W: Write>(w: &mut W, x: u32) -> std::io::Result<()> {
    w.write_all(&x.to_le_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_is_deterministic_per_name_and_seed() {
        let mut a = ParameterStore::new(7);
        let mut b = ParameterStore::new(7);
        let ia = a.get_or_init("w", 4, 5, Init::FanIn);
        let ib = b.get_or_init("w", 4, 5, Init::FanIn);
        assert_eq!(a.get(ia).data, b.get(ib).data);
        let mut c = ParameterStore::new(8);
        let ic = c.get_or_init("w", 4, 5, Init::FanIn);
        assert_ne!(a.get(ia).data, c.get(ic).data);
    }

    #[test]
    fn checkpoint_round_trip_and_shape_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.ckpt");
        let mut a = ParameterStore::new(7);
        let w = a.get_or_init("w", 3, 2, Init::FanIn);
        a.get_or_init("b", 1, 3, Init::ZerosWithOnes(1, 2));
        a.save(&path, "{\"kind\":\"test\"}").unwrap();

        let mut b = ParameterStore::new(99);
        let wb = b.get_or_init("w", 3, 2, Init::Zeros);
        b.get_or_init("b", 1, 3, Init::Zeros);
        let header = b.load(&path).unwrap();
        assert_eq!(header, "{\"kind\":\"test\"}");
        assert_eq!(b.get(wb).data, a.get(w).data);

        let mut c = ParameterStore::new(1);
        c.get_or_init("w", 2, 2, Init::Zeros);
        c.get_or_init("b", 1, 3, Init::Zeros);
        assert!(matches!(
            c.load(&path),
            Err(CheckpointError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn adam_with_zero_lr_leaves_parameters() {
        let mut s = ParameterStore::new(1);
        let w = s.get_or_init("w", 2, 2, Init::FanIn);
        let before = s.get(w).data.clone();
        s.get_mut(w).grad.fill(1.0);
        s.adam_step(1, 0.0, 0.9, 0.999, 1e-8);
        assert_eq!(s.get(w).data, before);
    }
}
