//! Binary PT files.
//!
//! Little-endian layout of every file:
//!
//! ```text
//! magic [8] | version u32 | dim u32 | blocks u64 | dt f64 | blocks_per_file u32
//! | repeat_from u64 (u64::MAX = none) | first_block u64 | count u64
//! then per block:
//!   dim_in u32 | dim_out u32 | entries u32
//!   entries × (β u32 | rows u32 | cols u32 | rows·cols × (re f64, im f64))
//!   closure_len u32 | closure_len × (re f64, im f64)
//! ```
//!
//! With a block limit `B` the PT is split over `base`, `base_1`, `base_2`, ...

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};

use super::{outer_count, ProcessTensor, PtError};
use crate::tensor::{Block, Chain};
use crate::C64;

pub const MAGIC: &[u8; 8] = b"PTMPOBIN";
pub const FORMAT_VERSION: u32 = 1;

/// Path of the `k`-th file of a split PT (`k = 0` is the base itself).
pub fn continuation_path(base: &Path, k: usize) -> PathBuf {
    if k == 0 {
        return base.to_path_buf();
    }
    let mut s = base.as_os_str().to_owned();
    s.push(format!("_{k}"));
    PathBuf::from(s)
}

struct Header {
    dim: u32,
    blocks: u64,
    dt: f64,
    repeat_from: u64,
    first: u64,
    count: u64,
}

struct Out<W: Write> {
    w: W,
    path: String,
}

impl<W: Write> Out<W> {
    fn bytes(&mut self, b: &[u8]) -> Result<(), PtError> {
        self.w.write_all(b).map_err(|e| PtError::Io(self.path.clone(), e))
    }
    fn u32(&mut self, x: u32) -> Result<(), PtError> {
        self.bytes(&x.to_le_bytes())
    }
    fn u64(&mut self, x: u64) -> Result<(), PtError> {
        self.bytes(&x.to_le_bytes())
    }
    fn c64(&mut self, x: C64) -> Result<(), PtError> {
        self.bytes(&x.re.to_le_bytes())?;
        self.bytes(&x.im.to_le_bytes())
    }
}

struct In<R: Read> {
    r: R,
    path: String,
}

impl<R: Read> In<R> {
    fn fill(&mut self, buf: &mut [u8]) -> Result<(), PtError> {
        self.r.read_exact(buf).map_err(|e| match e.kind() {
            ErrorKind::UnexpectedEof => PtError::Truncated(self.path.clone()),
            _ => PtError::Io(self.path.clone(), e),
        })
    }
    fn u32(&mut self) -> Result<u32, PtError> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }
    fn u64(&mut self) -> Result<u64, PtError> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }
    fn f64(&mut self) -> Result<f64, PtError> {
        Ok(f64::from_bits(self.u64()?))
    }
    fn c64(&mut self) -> Result<C64, PtError> {
        Ok(C64::new(self.f64()?, self.f64()?))
    }
    fn format(&self, msg: impl Into<String>) -> PtError {
        PtError::Format { path: self.path.clone(), msg: msg.into() }
    }
    fn len(&mut self, what: &str, limit: u64) -> Result<usize, PtError> {
        let x = self.u32()? as u64;
        if x > limit {
            return Err(self.format(format!("{what} {x} exceeds {limit}")));
        }
        Ok(x as usize)
    }
}

/// Writes the PT to `base` (and continuation files if `blocks_per_file` is
/// set). Returns the written paths.
pub fn write_pt(pt: &ProcessTensor, base: &Path, blocks_per_file: Option<usize>) -> Result<Vec<PathBuf>, PtError> {
    let n = pt.chain.len();
    let per = blocks_per_file.filter(|&b| b > 0).unwrap_or(n.max(1));
    let files = n.div_ceil(per).max(1);
    let mut paths = Vec::with_capacity(files);
    for k in 0..files {
        let path = continuation_path(base, k);
        let name = path.display().to_string();
        let f = File::create(&path).map_err(|e| PtError::Io(name.clone(), e))?;
        let mut out = Out { w: BufWriter::new(f), path: name };
        let first = k * per;
        let last = ((k + 1) * per).min(n);
        out.bytes(MAGIC)?;
        out.u32(FORMAT_VERSION)?;
        out.u32(pt.dim as u32)?;
        out.u64(n as u64)?;
        out.u64(pt.dt.to_bits())?;
        out.u32(blocks_per_file.unwrap_or(0) as u32)?;
        out.u64(pt.repeat_from.map_or(u64::MAX, |r| r as u64))?;
        out.u64(first as u64)?;
        out.u64((last - first) as u64)?;
        for l in first..last {
            let b = &pt.chain.blocks[l];
            out.u32(b.dim_in as u32)?;
            out.u32(b.dim_out as u32)?;
            out.u32(b.map.len() as u32)?;
            for (beta, m) in b.entries() {
                out.u32(beta)?;
                out.u32(m.nrows() as u32)?;
                out.u32(m.ncols() as u32)?;
                for &x in m.iter() {
                    out.c64(x)?;
                }
            }
            let q = &pt.chain.closures[l];
            out.u32(q.len() as u32)?;
            for &x in q.iter() {
                out.c64(x)?;
            }
        }
        out.w.flush().map_err(|e| PtError::Io(out.path.clone(), e))?;
        paths.push(path);
    }
    Ok(paths)
}

fn read_header<R: Read>(input: &mut In<R>) -> Result<Header, PtError> {
    let mut magic = [0u8; 8];
    input.fill(&mut magic)?;
    if &magic != MAGIC {
        return Err(input.format("bad magic"));
    }
    let version = input.u32()?;
    if version != FORMAT_VERSION {
        return Err(PtError::Version { path: input.path.clone(), found: version, expected: FORMAT_VERSION });
    }
    let dim = input.u32()?;
    let blocks = input.u64()?;
    let dt = input.f64()?;
    let _blocks_per_file = input.u32()?;
    Ok(Header {
        dim,
        blocks,
        dt,
        repeat_from: input.u64()?,
        first: input.u64()?,
        count: input.u64()?,
    })
}

const MAX_BOND: u64 = 1 << 20;

fn read_block<R: Read>(input: &mut In<R>, d4: u64) -> Result<(Block, Array1<C64>), PtError> {
    let dim_in = input.len("bond dimension", MAX_BOND)?;
    let dim_out = input.len("bond dimension", MAX_BOND)?;
    let entries = input.len("entry count", d4)?;
    let mut b = Block::new(dim_in, dim_out);
    for _ in 0..entries {
        let beta = input.u32()?;
        if beta as u64 >= d4 {
            return Err(input.format(format!("outer index {beta} out of range")));
        }
        let rows = input.len("rows", MAX_BOND)?;
        let cols = input.len("cols", MAX_BOND)?;
        if (rows, cols) != (dim_out, dim_in) {
            return Err(input.format(format!("matrix {rows}x{cols} in a {dim_out}x{dim_in} block")));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows * cols {
            data.push(input.c64()?);
        }
        let idx = b.push_matrix(Array2::from_shape_vec((rows, cols), data).expect("sized above"));
        b.map.insert(beta, idx);
    }
    b.dedup();
    let len = input.len("closure length", MAX_BOND)?;
    let mut q = Array1::zeros(len);
    for x in q.iter_mut() {
        *x = input.c64()?;
    }
    Ok((b, q))
}

/// Reads a PT written by [`write_pt`], following continuation files.
pub fn read_pt(base: &Path) -> Result<ProcessTensor, PtError> {
    let mut blocks = Vec::new();
    let mut closures = Vec::new();
    let mut k = 0;
    let mut first_header: Option<Header> = None;
    loop {
        let path = continuation_path(base, k);
        let name = path.display().to_string();
        let f = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == ErrorKind::NotFound && k > 0 => return Err(PtError::MissingFile(name)),
            Err(e) => return Err(PtError::Io(name, e)),
        };
        let mut input = In { r: BufReader::new(f), path: name };
        let h = read_header(&mut input)?;
        if let Some(h0) = &first_header {
            if h.dim != h0.dim || h.blocks != h0.blocks || h.dt.to_bits() != h0.dt.to_bits() {
                return Err(input.format("header does not match the first file"));
            }
        }
        if h.first != blocks.len() as u64 || h.first + h.count > h.blocks {
            return Err(input.format("block range does not continue the previous file"));
        }
        let d4 = outer_count(h.dim as usize)? as u64;
        for _ in 0..h.count {
            let (b, q) = read_block(&mut input, d4)?;
            blocks.push(b);
            closures.push(q);
        }
        let mut probe = [0u8; 1];
        if input.r.read(&mut probe).map_err(|e| PtError::Io(input.path.clone(), e))? != 0 {
            return Err(input.format("trailing data"));
        }
        if first_header.is_none() {
            first_header = Some(h);
        }
        if blocks.len() as u64 >= first_header.as_ref().map_or(0, |h| h.blocks) {
            break;
        }
        k += 1;
    }
    let h = first_header.expect("at least one file read");
    let chain = Chain::new(blocks, closures)?;
    let repeat_from = if h.repeat_from == u64::MAX { None } else { Some(h.repeat_from as usize) };
    if let Some(r) = repeat_from {
        if r >= chain.len() {
            return Err(PtError::Format { path: base.display().to_string(), msg: "repeat start beyond stored blocks".into() });
        }
    }
    Ok(ProcessTensor { dim: h.dim as usize, dt: h.dt, chain, repeat_from })
}
