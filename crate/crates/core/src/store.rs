//! Minimal named-tensor file format used for model weights and cached
//! embeddings.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "AMTS" | version u32 | count u64
//! per entry: name_len u32 | name utf-8 | ndim u32 | dims u64 * ndim | data f64 * prod(dims)
//! ```
//!
//! Entries are written in sorted name order so files are byte-stable for
//! identical contents.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{ArrayD, IxDyn};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"AMTS";
const VERSION: u32 = 1;

#[derive(Debug, Default, Clone)]
pub struct TensorStore {
    entries: BTreeMap<String, ArrayD<f64>>,
}

impl TensorStore {
    pub fn new() -> TensorStore {
        TensorStore::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, tensor: ArrayD<f64>) {
        self.entries.insert(name.into(), tensor);
    }

    pub fn get(&self, name: &str) -> Option<&ArrayD<f64>> {
        self.entries.get(name)
    }

    pub fn remove(&mut self, name: &str) -> Option<ArrayD<f64>> {
        self.entries.remove(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ArrayD<f64>)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let io = |e| Error::io(path, e);
        w.write_all(MAGIC).map_err(io)?;
        w.write_u32::<LittleEndian>(VERSION).map_err(io)?;
        w.write_u64::<LittleEndian>(self.entries.len() as u64).map_err(io)?;
        for (name, tensor) in &self.entries {
            w.write_u32::<LittleEndian>(name.len() as u32).map_err(io)?;
            w.write_all(name.as_bytes()).map_err(io)?;
            w.write_u32::<LittleEndian>(tensor.ndim() as u32).map_err(io)?;
            for &d in tensor.shape() {
                w.write_u64::<LittleEndian>(d as u64).map_err(io)?;
            }
            // standard layout guaranteed: tensors are stored row-major
            let contiguous = tensor.as_standard_layout();
            for &x in contiguous.iter() {
                w.write_f64::<LittleEndian>(x).map_err(io)?;
            }
        }
        w.flush().map_err(io)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<TensorStore> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let io = |e| Error::io(path, e);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != MAGIC {
            return Err(Error::validation(format!(
                "{}: not a tensor store (bad magic)",
                path.display()
            )));
        }
        let version = r.read_u32::<LittleEndian>().map_err(io)?;
        if version != VERSION {
            return Err(Error::validation(format!(
                "{}: unsupported tensor store version {version}",
                path.display()
            )));
        }
        let count = r.read_u64::<LittleEndian>().map_err(io)?;
        let mut entries = BTreeMap::new();
        for _ in 0..count {
            let name_len = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut name_bytes = vec![0u8; name_len];
            r.read_exact(&mut name_bytes).map_err(io)?;
            let name = String::from_utf8(name_bytes)
                .map_err(|e| Error::validation(format!("{}: bad entry name: {e}", path.display())))?;
            let ndim = r.read_u32::<LittleEndian>().map_err(io)? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(r.read_u64::<LittleEndian>().map_err(io)? as usize);
            }
            let len: usize = dims.iter().product();
            let mut data = vec![0f64; len];
            for x in &mut data {
                *x = r.read_f64::<LittleEndian>().map_err(io)?;
            }
            let tensor = ArrayD::from_shape_vec(IxDyn(&dims), data)
                .map_err(|e| Error::validation(format!("{}: bad tensor shape: {e}", path.display())))?;
            entries.insert(name, tensor);
        }
        Ok(TensorStore { entries })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn save_load_round_trip() {
        let mut store = TensorStore::new();
        store.insert("b.vec", array![1.0, -2.5, 3.25].into_dyn());
        store.insert("a.mat", array![[1.0, 2.0], [3.0, 4.0]].into_dyn());
        let tmp = tempfile::NamedTempFile::new().unwrap();
        store.save(tmp.path()).unwrap();
        let loaded = TensorStore::load(tmp.path()).unwrap();
        assert_eq!(loaded.len(), 2);
        assert_eq!(loaded.get("a.mat").unwrap(), store.get("a.mat").unwrap());
        assert_eq!(loaded.get("b.vec").unwrap(), store.get("b.vec").unwrap());
    }

    #[test]
    fn identical_contents_produce_identical_bytes() {
        let build = || {
            let mut s = TensorStore::new();
            s.insert("z", ndarray::Array2::from_elem((2, 3), 0.5f64).into_dyn());
            s.insert("a", array![1.0f64].into_dyn());
            s
        };
        let t1 = tempfile::NamedTempFile::new().unwrap();
        let t2 = tempfile::NamedTempFile::new().unwrap();
        build().save(t1.path()).unwrap();
        build().save(t2.path()).unwrap();
        assert_eq!(std::fs::read(t1.path()).unwrap(), std::fs::read(t2.path()).unwrap());
    }

    #[test]
    fn rejects_garbage_file() {
        let tmp = tempfile::NamedTempFile::new().unwrap();
        std::fs::write(tmp.path(), b"not a store").unwrap();
        assert!(TensorStore::load(tmp.path()).is_err());
    }
}
