use crate::error::{Error, Result};

pub(crate) const MAGIC: [u8; 4] = *b"CSK1";
pub(crate) const FORMAT_VERSION: u16 = 1;

/// Type tag written after the magic bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum SketchType {
    Distinct = 1,
    MaxDistinct = 2,
    AllThreshold = 3,
    Sum = 4,
}

impl SketchType {
    fn from_u8(tag: u8) -> Result<Self> {
        Ok(match tag {
            1 => SketchType::Distinct,
            2 => SketchType::MaxDistinct,
            3 => SketchType::AllThreshold,
            4 => SketchType::Sum,
            other => return Err(Error::Decode(format!("unknown sketch type tag {other}"))),
        })
    }
}

#[derive(Debug, Default)]
pub(crate) struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn header(&mut self, ty: SketchType, k: u32, seed: u64, count: usize) {
        self.buf.extend_from_slice(&MAGIC);
        self.u16(FORMAT_VERSION);
        self.u8(ty as u8);
        self.u32(k);
        self.u64(seed);
        self.u64(count as u64);
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    pub fn u16(&mut self, v: u16) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn i128(&mut self, v: i128) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    pub fn f64(&mut self, v: f64) {
        self.u64(v.to_bits());
    }
    pub fn bytes(&mut self, v: &[u8]) {
        self.u64(v.len() as u64);
        self.buf.extend_from_slice(v);
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Decode("unexpected end of input".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    /// Reads and checks the header; returns `(k, seed, count)`.
    pub fn header(&mut self, ty: SketchType) -> Result<(u32, u64, usize)> {
        if self.take(4)? != MAGIC {
            return Err(Error::Decode("bad magic bytes".into()));
        }
        let version = self.u16()?;
        if version != FORMAT_VERSION {
            return Err(Error::Decode(format!("unsupported format version {version}")));
        }
        let found = SketchType::from_u8(self.u8()?)?;
        if found != ty {
            return Err(Error::Decode(format!("expected {ty:?} sketch, found {found:?}")));
        }
        let k = self.u32()?;
        let seed = self.u64()?;
        let count = self.u64()?;
        let count = usize::try_from(count).map_err(|_| Error::Decode("entry count too large".into()))?;
        Ok((k, seed, count))
    }

    pub fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    pub fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    pub fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    pub fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    pub fn i128(&mut self) -> Result<i128> {
        Ok(i128::from_le_bytes(self.take(16)?.try_into().unwrap()))
    }
    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
    pub fn bytes(&mut self) -> Result<&'a [u8]> {
        let n = usize::try_from(self.u64()?).map_err(|_| Error::Decode("length too large".into()))?;
        self.take(n)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(Error::Decode(format!("{} trailing bytes", self.buf.len() - self.pos)))
        }
    }
}
