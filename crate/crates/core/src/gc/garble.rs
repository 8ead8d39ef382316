use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::bristol::{BooleanCircuit, GateKind};

pub const DEFAULT_LABEL_BITS: usize = 128;
pub const MAX_LABEL_BITS: usize = 2048;
/// Zero bytes appended to every encrypted label for row validation.
pub const PAD_BYTES: usize = 4;

const GC_MAGIC: [u8; 4] = *b"QGC1";
const MAP_MAGIC: [u8; 4] = *b"QOM1";

/// A wire label; the low bit of the last byte is the permute bit.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WireLabel(Vec<u8>);

impl WireLabel {
    pub fn from_bytes(bytes: Vec<u8>) -> Self {
        Self(bytes)
    }

    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn bits(&self) -> usize {
        8 * self.0.len()
    }

    pub fn permute_bit(&self) -> bool {
        self.0.last().is_some_and(|b| b & 1 == 1)
    }

    /// Bit `i`, most significant bit of byte 0 first.
    pub fn bit(&self, i: usize) -> bool {
        (self.0[i / 8] >> (7 - i % 8)) & 1 == 1
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut bytes = vec![0u8; bits.len().div_ceil(8)];
        for (i, &b) in bits.iter().enumerate() {
            bytes[i / 8] |= (b as u8) << (7 - i % 8);
        }
        Self(bytes)
    }
}

fn check_label_bits(label_bits: usize) -> Result<usize> {
    if label_bits == 0 || !label_bits.is_multiple_of(8) || label_bits > MAX_LABEL_BITS {
        return Err(Error::Validation(format!(
            "label length {label_bits} must be a positive multiple of 8 up to {MAX_LABEL_BITS}"
        )));
    }
    Ok(label_bits / 8)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GarbledGate {
    pub gate_id: u32,
    pub kind: GateKind,
    /// Four rows for AND/XOR indexed by `2·perm(a) + perm(b)`; none for INV.
    pub rows: Vec<Vec<u8>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GarbledCircuit {
    label_bits: usize,
    gates: Vec<GarbledGate>,
}

impl GarbledCircuit {
    pub fn label_bits(&self) -> usize {
        self.label_bits
    }

    pub fn gates(&self) -> &[GarbledGate] {
        &self.gates
    }

    pub fn gates_mut(&mut self) -> &mut [GarbledGate] {
        &mut self.gates
    }

    fn row_len(&self) -> usize {
        self.label_bits / 8 + PAD_BYTES
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(&GC_MAGIC);
        out.extend_from_slice(&(self.label_bits as u32).to_be_bytes());
        out.extend_from_slice(&(self.gates.len() as u64).to_be_bytes());
        for g in &self.gates {
            out.extend_from_slice(&g.gate_id.to_be_bytes());
            out.push(g.kind.code());
            out.push(g.rows.len() as u8);
            for r in &g.rows {
                out.extend_from_slice(r);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != GC_MAGIC {
            return Err(Error::Decode("bad garbled-circuit magic".into()));
        }
        let label_bits = r.u32()? as usize;
        check_label_bits(label_bits).map_err(|e| Error::Decode(e.to_string()))?;
        let n_gates = r.u64()?;
        let row_len = label_bits / 8 + PAD_BYTES;
        let mut gates = Vec::new();
        for _ in 0..n_gates {
            let gate_id = r.u32()?;
            let code = r.take(1)?[0];
            let kind = GateKind::from_code(code).ok_or_else(|| Error::Decode(format!("unknown gate code {code}")))?;
            let n_rows = r.take(1)?[0] as usize;
            let expected = if kind == GateKind::Inv { 0 } else { 4 };
            if n_rows != expected {
                return Err(Error::Decode(format!("{} gate with {n_rows} rows", kind.name())));
            }
            let rows = (0..n_rows).map(|_| r.take(row_len).map(<[u8]>::to_vec)).collect::<Result<_>>()?;
            gates.push(GarbledGate { gate_id, kind, rows });
        }
        r.finish()?;
        Ok(Self { label_bits, gates })
    }
}

pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Decode(format!("truncated input: need {n} bytes at offset {}", self.pos)))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::Decode(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

/// Both labels of every input wire, in wire order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputEncoding {
    pairs: Vec<[WireLabel; 2]>,
}

impl InputEncoding {
    pub fn label(&self, wire: usize, bit: bool) -> &WireLabel {
        &self.pairs[wire][bit as usize]
    }

    pub fn pair(&self, wire: usize) -> &[WireLabel; 2] {
        &self.pairs[wire]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Active labels for `bits` on wires `start..start + bits.len()`.
    pub fn encode(&self, start: usize, bits: &[bool]) -> Vec<WireLabel> {
        bits.iter().enumerate().map(|(i, &b)| self.label(start + i, b).clone()).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputEntry {
    pub permute_bit: bool,
    pub digest: [u8; 32],
    pub bit: bool,
}

/// For each output wire, the digests of both labels and their meaning.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputMap {
    wires: Vec<[OutputEntry; 2]>,
}

fn output_digest(index: usize, label: &WireLabel) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"out");
    h.update((index as u32).to_be_bytes());
    h.update(label.bytes());
    h.finalize().into()
}

impl OutputMap {
    pub fn len(&self) -> usize {
        self.wires.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wires.is_empty()
    }

    pub fn entries(&self, index: usize) -> &[OutputEntry; 2] {
        &self.wires[index]
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.wires.len() * 68);
        out.extend_from_slice(&MAP_MAGIC);
        out.extend_from_slice(&(self.wires.len() as u32).to_be_bytes());
        for pair in &self.wires {
            for e in pair {
                out.push(((e.permute_bit as u8) << 1) | e.bit as u8);
                out.extend_from_slice(&e.digest);
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(4)? != MAP_MAGIC {
            return Err(Error::Decode("bad output-map magic".into()));
        }
        let n = r.u32()? as usize;
        let mut wires = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            let mut entry = || -> Result<OutputEntry> {
                let flags = r.take(1)?[0];
                if flags > 3 {
                    return Err(Error::Decode(format!("bad output-map flags {flags}")));
                }
                Ok(OutputEntry {
                    permute_bit: flags & 2 != 0,
                    bit: flags & 1 != 0,
                    digest: r.take(32)?.try_into().expect("32 bytes"),
                })
            };
            let a = entry()?;
            let b = entry()?;
            wires.push([a, b]);
        }
        r.finish()?;
        Ok(Self { wires })
    }
}

/// Everything the garbler produces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Garbling {
    pub circuit: GarbledCircuit,
    pub inputs: InputEncoding,
    pub output_map: OutputMap,
    /// Garbler-side label pair of every wire. Never sent.
    pub wire_labels: Vec<[WireLabel; 2]>,
}

/// Row key `H(A ‖ B ‖ gate_id ‖ row)`, extended by counter blocks when
/// longer than one digest.
fn row_key(a: &WireLabel, b: &WireLabel, gate_id: u32, row: u8, len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len.next_multiple_of(32));
    let mut block = 0u32;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(a.bytes());
        h.update(b.bytes());
        h.update(gate_id.to_be_bytes());
        h.update([row]);
        if block > 0 {
            h.update(block.to_be_bytes());
        }
        out.extend_from_slice(&h.finalize());
        block += 1;
    }
    out.truncate(len);
    out
}

fn random_label_pair<R: Rng + ?Sized>(bytes: usize, rng: &mut R) -> [WireLabel; 2] {
    let mut l0 = vec![0u8; bytes];
    let mut l1 = vec![0u8; bytes];
    rng.fill(l0.as_mut_slice());
    rng.fill(l1.as_mut_slice());
    let last = bytes - 1;
    l1[last] = (l1[last] & !1) | (!l0[last] & 1);
    [WireLabel(l0), WireLabel(l1)]
}

/// Classic four-row point-and-permute garbling. INV gates swap labels and
/// carry no ciphertexts.
pub fn garble<R: Rng + ?Sized>(circuit: &BooleanCircuit, label_bits: usize, rng: &mut R) -> Result<Garbling> {
    let label_bytes = check_label_bits(label_bits)?;
    let row_len = label_bytes + PAD_BYTES;
    let mut labels: Vec<Option<[WireLabel; 2]>> = vec![None; circuit.n_wires()];
    for slot in labels.iter_mut().take(circuit.n_inputs()) {
        *slot = Some(random_label_pair(label_bytes, rng));
    }
    let mut gates = Vec::with_capacity(circuit.gates().len());
    for (id, g) in circuit.gates().iter().enumerate() {
        let gate_id = id as u32;
        let a = labels[g.inputs[0]].clone().expect("validated topological order");
        if g.kind == GateKind::Inv {
            labels[g.output] = Some([a[1].clone(), a[0].clone()]);
            gates.push(GarbledGate { gate_id, kind: g.kind, rows: Vec::new() });
            continue;
        }
        let b = labels[g.inputs[1]].clone().expect("validated topological order");
        let out = random_label_pair(label_bytes, rng);
        let mut rows = vec![Vec::new(); 4];
        for va in [false, true] {
            for vb in [false, true] {
                let (la, lb) = (&a[va as usize], &b[vb as usize]);
                let row = 2 * la.permute_bit() as u8 + lb.permute_bit() as u8;
                let mut plain = out[g.kind.eval(va, vb) as usize].bytes().to_vec();
                plain.extend_from_slice(&[0u8; PAD_BYTES]);
                let key = row_key(la, lb, gate_id, row, row_len);
                rows[row as usize] = plain.iter().zip(&key).map(|(p, k)| p ^ k).collect();
            }
        }
        labels[g.output] = Some(out);
        gates.push(GarbledGate { gate_id, kind: g.kind, rows });
    }
    let inputs = InputEncoding {
        pairs: labels[..circuit.n_inputs()].iter().map(|p| p.clone().expect("input labels")).collect(),
    };
    let wires = circuit
        .output_wires()
        .enumerate()
        .map(|(i, w)| {
            let pair = labels[w].as_ref().expect("outputs are assigned");
            [false, true].map(|bit| OutputEntry {
                permute_bit: pair[bit as usize].permute_bit(),
                digest: output_digest(i, &pair[bit as usize]),
                bit,
            })
        })
        .collect();
    let wire_labels = labels.into_iter().map(|p| p.unwrap_or_else(|| random_label_pair(label_bytes, rng))).collect();
    Ok(Garbling { circuit: GarbledCircuit { label_bits, gates }, inputs, output_map: OutputMap { wires }, wire_labels })
}

/// Decrypts one row under `(a, b)`; fails unless the padding is all zero.
pub fn decrypt_row(gc: &GarbledCircuit, gate: usize, row: usize, a: &WireLabel, b: &WireLabel) -> Result<WireLabel> {
    let g = gc.gates.get(gate).ok_or_else(|| Error::Validation(format!("no gate {gate}")))?;
    let cipher = g.rows.get(row).ok_or_else(|| Error::Validation(format!("gate {gate} has no row {row}")))?;
    let key = row_key(a, b, g.gate_id, row as u8, gc.row_len());
    let plain: Vec<u8> = cipher.iter().zip(&key).map(|(c, k)| c ^ k).collect();
    let (label, pad) = plain.split_at(gc.label_bits / 8);
    if pad.iter().any(|&p| p != 0) {
        return Err(Error::Corruption(format!("gate {gate} row {row} failed padding check")));
    }
    Ok(WireLabel(label.to_vec()))
}

/// Active label of every wire (`None` for wires never reached).
pub fn evaluate_traced(
    gc: &GarbledCircuit,
    circuit: &BooleanCircuit,
    active: &[WireLabel],
) -> Result<Vec<Option<WireLabel>>> {
    if active.len() != circuit.n_inputs() {
        return Err(Error::Validation(format!(
            "circuit takes {} input labels, got {}",
            circuit.n_inputs(),
            active.len()
        )));
    }
    if gc.gates.len() != circuit.gates().len() {
        return Err(Error::Corruption("garbled circuit does not match the circuit".into()));
    }
    let label_bytes = gc.label_bits / 8;
    if let Some(bad) = active.iter().find(|l| l.0.len() != label_bytes) {
        return Err(Error::Validation(format!("input label has {} bits, expected {}", bad.bits(), gc.label_bits)));
    }
    let mut wires: Vec<Option<WireLabel>> = vec![None; circuit.n_wires()];
    for (w, l) in active.iter().enumerate() {
        wires[w] = Some(l.clone());
    }
    for (i, g) in circuit.gates().iter().enumerate() {
        if gc.gates[i].kind != g.kind {
            return Err(Error::Corruption(format!("gate {i} kind mismatch")));
        }
        let a = wires[g.inputs[0]].clone().expect("validated topological order");
        let out = if g.kind == GateKind::Inv {
            a
        } else {
            let b = wires[g.inputs[1]].as_ref().expect("validated topological order");
            let row = 2 * a.permute_bit() as usize + b.permute_bit() as usize;
            decrypt_row(gc, i, row, &a, b)?
        };
        wires[g.output] = Some(out);
    }
    Ok(wires)
}

/// Active output labels.
pub fn evaluate(gc: &GarbledCircuit, circuit: &BooleanCircuit, active: &[WireLabel]) -> Result<Vec<WireLabel>> {
    let wires = evaluate_traced(gc, circuit, active)?;
    Ok(circuit.output_wires().map(|w| wires[w].clone().expect("outputs are assigned")).collect())
}

pub fn decode(labels: &[WireLabel], map: &OutputMap) -> Result<Vec<bool>> {
    if labels.len() != map.wires.len() {
        return Err(Error::Decode(format!("{} output labels for {} mapped wires", labels.len(), map.wires.len())));
    }
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let d = output_digest(i, l);
            map.wires[i]
                .iter()
                .find(|e| e.permute_bit == l.permute_bit() && e.digest == d)
                .map(|e| e.bit)
                .ok_or_else(|| Error::Decode(format!("output label {i} not in the map")))
        })
        .collect()
}
