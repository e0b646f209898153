//! Trace formats.
//!
//! * Text: one `R <addr>` or `W <addr>` per line, address in decimal or
//!   `0x` hex. Blank lines and lines starting with `#` are skipped.
//! * Canonical binary: the 8-byte magic `RACTRC01`, then 9-byte records of
//!   one opcode byte (`0x00` load, `0x01` store) and a little-endian u64
//!   byte address.
//! * ChampSim: headerless 64-byte little-endian instruction records. Each
//!   record expands to its source-memory loads then destination-memory
//!   stores. Compressed (`.xz`) traces must be decompressed first, e.g.
//!   `xz -dc trace.champsimtrace.xz | racsim run --format champsim --trace -`.

use std::fmt;
use std::io::{self, BufRead, ErrorKind, Read, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::access::{Access, AccessKind};

pub const BINARY_MAGIC: &[u8; 8] = b"RACTRC01";
pub const BINARY_RECORD_LEN: usize = 9;
pub const CHAMPSIM_RECORD_LEN: usize = 64;

const OP_LOAD: u8 = 0x00;
const OP_STORE: u8 = 0x01;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: malformed trace line '{content}'")]
    MalformedLine { line: usize, content: String },
    #[error("bad magic: not a canonical binary trace")]
    BadMagic,
    #[error("record {record}: truncated ({got} of {want} bytes)")]
    Truncated {
        record: usize,
        got: usize,
        want: usize,
    },
    #[error("record {record}: unknown opcode {opcode:#04x}")]
    UnknownOpcode { record: usize, opcode: u8 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl TraceError {
    /// True for content errors (as opposed to I/O failures).
    pub fn is_malformed(&self) -> bool {
        !matches!(self, TraceError::Io(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceFormat {
    Text,
    Binary,
    ChampSim,
}

impl TraceFormat {
    pub fn name(self) -> &'static str {
        match self {
            TraceFormat::Text => "text",
            TraceFormat::Binary => "bin",
            TraceFormat::ChampSim => "champsim",
        }
    }
}

impl fmt::Display for TraceFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraceFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(TraceFormat::Text),
            "bin" => Ok(TraceFormat::Binary),
            "champsim" => Ok(TraceFormat::ChampSim),
            other => Err(format!(
                "unknown trace format '{other}' (expected text|bin|champsim)"
            )),
        }
    }
}

/// Where a trace came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceSource {
    Decoded(TraceFormat),
    /// Synthetic generator, by pattern name.
    Generated(&'static str),
}

/// An in-memory trace with its source tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStream {
    pub source: TraceSource,
    pub accesses: Vec<Access>,
}

impl TraceStream {
    pub fn new(source: TraceSource, accesses: Vec<Access>) -> Self {
        Self { source, accesses }
    }

    pub fn len(&self) -> usize {
        self.accesses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accesses.is_empty()
    }
}

fn parse_number(s: &str) -> Option<u64> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}

/// Parse one non-blank, non-comment text line. `line_no` is 1-based and only
/// used for the error.
pub fn parse_text_line(line: &str, line_no: usize) -> Result<Access, TraceError> {
    let malformed = || TraceError::MalformedLine {
        line: line_no,
        content: line.to_string(),
    };
    let mut fields = line.split_whitespace();
    let kind = match fields.next() {
        Some("R") | Some("r") => AccessKind::Load,
        Some("W") | Some("w") => AccessKind::Store,
        _ => return Err(malformed()),
    };
    let address = fields.next().and_then(parse_number).ok_or_else(malformed)?;
    if fields.next().is_some() {
        return Err(malformed());
    }
    Ok(Access { kind, address })
}

/// Streaming reader for the text format.
pub struct TextReader<R> {
    inner: R,
    line_no: usize,
    buf: String,
}

impl<R: BufRead> TextReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line_no: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for TextReader<R> {
    type Item = Result<Access, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(e) => return Some(Err(e.into())),
            }
            self.line_no += 1;
            let line = self.buf.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            return Some(parse_text_line(line, self.line_no));
        }
    }
}

pub fn write_text<W: Write>(mut out: W, accesses: &[Access]) -> io::Result<()> {
    for a in accesses {
        let op = match a.kind {
            AccessKind::Load => 'R',
            AccessKind::Store => 'W',
        };
        writeln!(out, "{op} {:#x}", a.address)?;
    }
    out.flush()
}

/// Fill `buf` as far as the stream allows; returns the byte count read.
fn read_full<R: Read>(r: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

pub fn encode_binary(accesses: &[Access]) -> Vec<u8> {
    let mut out = Vec::with_capacity(BINARY_MAGIC.len() + accesses.len() * BINARY_RECORD_LEN);
    out.extend_from_slice(BINARY_MAGIC);
    for a in accesses {
        out.push(match a.kind {
            AccessKind::Load => OP_LOAD,
            AccessKind::Store => OP_STORE,
        });
        out.extend_from_slice(&a.address.to_le_bytes());
    }
    out
}

/// Streaming reader for the canonical binary format. Records are numbered
/// from 0; the header is checked on the first call to `next`.
pub struct BinaryReader<R> {
    inner: R,
    record: usize,
    header_checked: bool,
    done: bool,
}

impl<R: Read> BinaryReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            record: 0,
            header_checked: false,
            done: false,
        }
    }

    fn check_header(&mut self) -> Result<(), TraceError> {
        let mut magic = [0u8; 8];
        let n = read_full(&mut self.inner, &mut magic)?;
        if n < magic.len() || &magic != BINARY_MAGIC {
            return Err(TraceError::BadMagic);
        }
        Ok(())
    }

    fn read_record(&mut self) -> Option<Result<Access, TraceError>> {
        let mut rec = [0u8; BINARY_RECORD_LEN];
        let n = match read_full(&mut self.inner, &mut rec) {
            Ok(n) => n,
            Err(e) => return Some(Err(e.into())),
        };
        if n == 0 {
            return None;
        }
        let record = self.record;
        self.record += 1;
        if n < BINARY_RECORD_LEN {
            return Some(Err(TraceError::Truncated {
                record,
                got: n,
                want: BINARY_RECORD_LEN,
            }));
        }
        let kind = match rec[0] {
            OP_LOAD => AccessKind::Load,
            OP_STORE => AccessKind::Store,
            opcode => return Some(Err(TraceError::UnknownOpcode { record, opcode })),
        };
        let address = u64::from_le_bytes(rec[1..].try_into().expect("8 bytes"));
        Some(Ok(Access { kind, address }))
    }
}

impl<R: Read> Iterator for BinaryReader<R> {
    type Item = Result<Access, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        if !self.header_checked {
            self.header_checked = true;
            if let Err(e) = self.check_header() {
                self.done = true;
                return Some(Err(e));
            }
        }
        let item = self.read_record();
        if !matches!(item, Some(Ok(_))) {
            self.done = true;
        }
        item
    }
}

pub fn decode_binary(bytes: &[u8]) -> Result<TraceStream, TraceError> {
    let accesses = BinaryReader::new(bytes).collect::<Result<Vec<_>, _>>()?;
    Ok(TraceStream::new(
        TraceSource::Decoded(TraceFormat::Binary),
        accesses,
    ))
}

/// One ChampSim input instruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChampSimInstr {
    pub ip: u64,
    pub is_branch: u8,
    pub branch_taken: u8,
    pub dest_regs: [u8; 2],
    pub src_regs: [u8; 4],
    pub dest_mem: [u64; 2],
    pub src_mem: [u64; 4],
}

fn le_u64(bytes: &[u8], offset: usize) -> u64 {
    u64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"))
}

impl ChampSimInstr {
    pub fn decode(rec: &[u8; CHAMPSIM_RECORD_LEN]) -> Self {
        Self {
            ip: le_u64(rec, 0),
            is_branch: rec[8],
            branch_taken: rec[9],
            dest_regs: [rec[10], rec[11]],
            src_regs: [rec[12], rec[13], rec[14], rec[15]],
            dest_mem: [le_u64(rec, 16), le_u64(rec, 24)],
            src_mem: [
                le_u64(rec, 32),
                le_u64(rec, 40),
                le_u64(rec, 48),
                le_u64(rec, 56),
            ],
        }
    }

    pub fn encode(&self) -> [u8; CHAMPSIM_RECORD_LEN] {
        let mut rec = [0u8; CHAMPSIM_RECORD_LEN];
        rec[0..8].copy_from_slice(&self.ip.to_le_bytes());
        rec[8] = self.is_branch;
        rec[9] = self.branch_taken;
        rec[10..12].copy_from_slice(&self.dest_regs);
        rec[12..16].copy_from_slice(&self.src_regs);
        for (i, m) in self.dest_mem.iter().enumerate() {
            rec[16 + 8 * i..24 + 8 * i].copy_from_slice(&m.to_le_bytes());
        }
        for (i, m) in self.src_mem.iter().enumerate() {
            rec[32 + 8 * i..40 + 8 * i].copy_from_slice(&m.to_le_bytes());
        }
        rec
    }

    /// Loads for nonzero source operands, then stores for nonzero
    /// destination operands, each in array order.
    pub fn accesses(&self) -> Vec<Access> {
        let loads = self
            .src_mem
            .iter()
            .filter(|&&a| a != 0)
            .map(|&a| Access::load(a));
        let stores = self
            .dest_mem
            .iter()
            .filter(|&&a| a != 0)
            .map(|&a| Access::store(a));
        loads.chain(stores).collect()
    }
}

/// Decode one 64-byte record. `record` is the index reported on truncation.
pub fn decode_champsim_record(bytes: &[u8], record: usize) -> Result<ChampSimInstr, TraceError> {
    let rec: &[u8; CHAMPSIM_RECORD_LEN] = bytes
        .get(..CHAMPSIM_RECORD_LEN)
        .and_then(|b| b.try_into().ok())
        .ok_or(TraceError::Truncated {
            record,
            got: bytes.len(),
            want: CHAMPSIM_RECORD_LEN,
        })?;
    Ok(ChampSimInstr::decode(rec))
}

/// Streaming ChampSim reader yielding memory accesses. Errors carry the
/// instruction record index (0-based).
pub struct ChampSimReader<R> {
    inner: R,
    record: usize,
    pending: std::vec::IntoIter<Access>,
    done: bool,
}

impl<R: Read> ChampSimReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            record: 0,
            pending: Vec::new().into_iter(),
            done: false,
        }
    }

    /// Next instruction record, or `None` at a clean end of stream.
    pub fn next_instr(&mut self) -> Option<Result<ChampSimInstr, TraceError>> {
        let mut rec = [0u8; CHAMPSIM_RECORD_LEN];
        let n = match read_full(&mut self.inner, &mut rec) {
            Ok(n) => n,
            Err(e) => return Some(Err(e.into())),
        };
        if n == 0 {
            return None;
        }
        let record = self.record;
        self.record += 1;
        Some(decode_champsim_record(&rec[..n], record))
    }
}

impl<R: Read> Iterator for ChampSimReader<R> {
    type Item = Result<Access, TraceError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(a) = self.pending.next() {
                return Some(Ok(a));
            }
            if self.done {
                return None;
            }
            match self.next_instr() {
                None => {
                    self.done = true;
                    return None;
                }
                Some(Err(e)) => {
                    self.done = true;
                    return Some(Err(e));
                }
                Some(Ok(instr)) => self.pending = instr.accesses().into_iter(),
            }
        }
    }
}

/// Streaming reader over any supported format.
pub fn reader<'a, R: BufRead + 'a>(
    format: TraceFormat,
    input: R,
) -> Box<dyn Iterator<Item = Result<Access, TraceError>> + 'a> {
    match format {
        TraceFormat::Text => Box::new(TextReader::new(input)),
        TraceFormat::Binary => Box::new(BinaryReader::new(input)),
        TraceFormat::ChampSim => Box::new(ChampSimReader::new(input)),
    }
}

pub fn read_all<R: BufRead>(format: TraceFormat, input: R) -> Result<TraceStream, TraceError> {
    let accesses = reader(format, input).collect::<Result<Vec<_>, _>>()?;
    Ok(TraceStream::new(TraceSource::Decoded(format), accesses))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_lines() {
        assert_eq!(parse_text_line("R 0x40", 1).unwrap(), Access::load(0x40));
        assert_eq!(parse_text_line("W 64", 1).unwrap(), Access::store(0x40));
        assert!(matches!(
            parse_text_line("X 0x40", 7),
            Err(TraceError::MalformedLine { line: 7, .. })
        ));
        assert!(parse_text_line("R", 1).is_err());
        assert!(parse_text_line("R 0xZZ", 1).is_err());
        assert!(parse_text_line("R 1 2", 1).is_err());
    }

    #[test]
    fn text_reader_skips_comments_and_blanks() {
        let src = "# header\n\nR 0x0\n   \nW 0x40\n# tail\n";
        let t = read_all(TraceFormat::Text, src.as_bytes()).unwrap();
        assert_eq!(t.accesses, vec![Access::load(0), Access::store(0x40)]);
    }

    #[test]
    fn text_reader_reports_physical_line() {
        let src = "# c\nR 0\nbogus\n";
        match read_all(TraceFormat::Text, src.as_bytes()) {
            Err(TraceError::MalformedLine { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn binary_single_load() {
        let mut bytes = BINARY_MAGIC.to_vec();
        bytes.extend_from_slice(&[0x00, 0x40, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(
            decode_binary(&bytes).unwrap().accesses,
            vec![Access::load(0x40)]
        );
    }

    #[test]
    fn binary_errors() {
        assert!(matches!(
            decode_binary(b"RACTRC02"),
            Err(TraceError::BadMagic)
        ));
        assert!(matches!(decode_binary(b"RAC"), Err(TraceError::BadMagic)));
        let mut bytes = BINARY_MAGIC.to_vec();
        bytes.extend_from_slice(&[0, 1, 2, 3, 4]);
        assert!(matches!(
            decode_binary(&bytes),
            Err(TraceError::Truncated {
                record: 0,
                got: 5,
                ..
            })
        ));
        let mut bytes = encode_binary(&[Access::load(1)]);
        bytes.extend_from_slice(&[0x07, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert!(matches!(
            decode_binary(&bytes),
            Err(TraceError::UnknownOpcode {
                record: 1,
                opcode: 7
            })
        ));
        assert!(decode_binary(BINARY_MAGIC).unwrap().is_empty());
    }

    #[test]
    fn champsim_layout() {
        let mut rec = [0u8; 64];
        rec[32..40].copy_from_slice(&0x1000u64.to_le_bytes());
        let instr = decode_champsim_record(&rec, 0).unwrap();
        assert_eq!(instr.src_mem, [0x1000, 0, 0, 0]);
        assert_eq!(instr.accesses(), vec![Access::load(0x1000)]);

        let zero = decode_champsim_record(&[0u8; 64], 0).unwrap();
        assert!(zero.accesses().is_empty());

        assert!(matches!(
            decode_champsim_record(&[0u8; 63], 4),
            Err(TraceError::Truncated {
                record: 4,
                got: 63,
                want: 64
            })
        ));
    }

    #[test]
    fn champsim_field_offsets() {
        let mut rec = [0u8; 64];
        for (i, b) in rec.iter_mut().enumerate() {
            *b = i as u8;
        }
        let instr = ChampSimInstr::decode(&rec);
        assert_eq!(instr.ip, u64::from_le_bytes([0, 1, 2, 3, 4, 5, 6, 7]));
        assert_eq!((instr.is_branch, instr.branch_taken), (8, 9));
        assert_eq!(instr.dest_regs, [10, 11]);
        assert_eq!(instr.src_regs, [12, 13, 14, 15]);
        assert_eq!(
            instr.dest_mem[0],
            u64::from_le_bytes([16, 17, 18, 19, 20, 21, 22, 23])
        );
        assert_eq!(
            instr.src_mem[3],
            u64::from_le_bytes([56, 57, 58, 59, 60, 61, 62, 63])
        );
        assert_eq!(instr.encode(), rec);
    }

    #[test]
    fn loads_before_stores() {
        let instr = ChampSimInstr {
            src_mem: [0xA0, 0xB0, 0, 0],
            dest_mem: [0xC0, 0],
            ..Default::default()
        };
        assert_eq!(
            instr.accesses(),
            vec![Access::load(0xA0), Access::load(0xB0), Access::store(0xC0)]
        );
    }

    #[test]
    fn champsim_reader_truncated_tail() {
        let mut bytes = Vec::new();
        let instr = ChampSimInstr {
            src_mem: [0x40, 0, 0, 0],
            ..Default::default()
        };
        bytes.extend_from_slice(&instr.encode());
        bytes.extend_from_slice(&[0u8; 10]);
        let items: Vec<_> = ChampSimReader::new(&bytes[..]).collect();
        assert_eq!(items.len(), 2);
        assert_eq!(items[0].as_ref().unwrap(), &Access::load(0x40));
        assert!(matches!(
            items[1],
            Err(TraceError::Truncated {
                record: 1,
                got: 10,
                ..
            })
        ));
    }

    fn arb_access() -> impl Strategy<Value = Access> {
        (any::<bool>(), any::<u64>()).prop_map(|(st, a)| {
            if st {
                Access::store(a)
            } else {
                Access::load(a)
            }
        })
    }

    proptest! {
        #[test]
        fn binary_round_trip(accesses in proptest::collection::vec(arb_access(), 0..200)) {
            let decoded = decode_binary(&encode_binary(&accesses)).unwrap();
            prop_assert_eq!(decoded.accesses, accesses);
        }

        #[test]
        fn text_round_trip(accesses in proptest::collection::vec(arb_access(), 0..200)) {
            let mut buf = Vec::new();
            write_text(&mut buf, &accesses).unwrap();
            prop_assert_eq!(read_all(TraceFormat::Text, &buf[..]).unwrap().accesses, accesses);
        }

        #[test]
        fn champsim_round_trip(ip in any::<u64>(), dst in any::<[u64; 2]>(), src in any::<[u64; 4]>(), regs in any::<[u8; 4]>()) {
            let instr = ChampSimInstr { ip, is_branch: regs[0], branch_taken: regs[1], dest_regs: [regs[2], regs[3]], src_regs: regs, dest_mem: dst, src_mem: src };
            prop_assert_eq!(ChampSimInstr::decode(&instr.encode()), instr);
            let nonzero = dst.iter().chain(&src).filter(|&&a| a != 0).count();
            prop_assert_eq!(instr.accesses().len(), nonzero);
        }
    }
}
