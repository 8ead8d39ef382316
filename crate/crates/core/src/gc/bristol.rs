use std::collections::HashSet;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Xor,
    Inv,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Xor => "XOR",
            GateKind::Inv => "INV",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::Inv => 1,
            _ => 2,
        }
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a & b,
            GateKind::Xor => a ^ b,
            GateKind::Inv => !a,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            GateKind::And => 0,
            GateKind::Xor => 1,
            GateKind::Inv => 2,
        }
    }

    pub(crate) fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(GateKind::And),
            1 => Some(GateKind::Xor),
            2 => Some(GateKind::Inv),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    /// One wire for INV, two otherwise.
    pub inputs: Vec<usize>,
    pub output: usize,
}

/// Topologically ordered boolean circuit. Input wires come first (party 1,
/// then party 2); outputs are the last `output_width` wires.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BooleanCircuit {
    n_wires: usize,
    gates: Vec<Gate>,
    input_widths: [usize; 2],
    output_width: usize,
}

impl BooleanCircuit {
    /// Validates and builds a circuit from its parts.
    pub fn new(n_wires: usize, gates: Vec<Gate>, input_widths: [usize; 2], output_width: usize) -> Result<Self> {
        let c = Self { n_wires, gates, input_widths, output_width };
        c.validate().map_err(|(idx, message)| Error::Validation(format!("gate {idx}: {message}")))?;
        Ok(c)
    }

    pub fn n_wires(&self) -> usize {
        self.n_wires
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn input_widths(&self) -> [usize; 2] {
        self.input_widths
    }

    pub fn n_inputs(&self) -> usize {
        self.input_widths[0] + self.input_widths[1]
    }

    pub fn output_width(&self) -> usize {
        self.output_width
    }

    pub fn input_wires(&self, party: usize) -> std::ops::Range<usize> {
        match party {
            0 => 0..self.input_widths[0],
            _ => self.input_widths[0]..self.n_inputs(),
        }
    }

    pub fn output_wires(&self) -> std::ops::Range<usize> {
        self.n_wires - self.output_width..self.n_wires
    }

    /// Errors as `(gate index, message)`.
    fn validate(&self) -> std::result::Result<(), (usize, String)> {
        let n_in = self.n_inputs();
        if self.output_width > self.n_wires || n_in > self.n_wires {
            return Err((0, "input/output widths exceed wire count".into()));
        }
        let mut assigned = vec![false; self.n_wires];
        assigned[..n_in].fill(true);
        for (i, g) in self.gates.iter().enumerate() {
            if g.inputs.len() != g.kind.arity() {
                return Err((i, format!("{} takes {} inputs, got {}", g.kind.name(), g.kind.arity(), g.inputs.len())));
            }
            for &w in g.inputs.iter().chain(std::iter::once(&g.output)) {
                if w >= self.n_wires {
                    return Err((i, format!("wire {w} out of range (n_wires = {})", self.n_wires)));
                }
            }
            for &w in &g.inputs {
                if !assigned[w] {
                    return Err((i, format!("dangling wire {w} read before assignment")));
                }
            }
            if assigned[g.output] {
                return Err((i, format!("wire {} assigned twice", g.output)));
            }
            assigned[g.output] = true;
        }
        for w in self.output_wires() {
            if !assigned[w] {
                return Err((self.gates.len(), format!("output wire {w} never assigned")));
            }
        }
        Ok(())
    }

    /// Plain evaluation on `inputs` (party 1 bits then party 2 bits, in wire
    /// order). Returns the output wires in order.
    pub fn plain_eval(&self, inputs: &[bool]) -> Result<Vec<bool>> {
        if inputs.len() != self.n_inputs() {
            return Err(Error::Validation(format!(
                "circuit takes {} input bits, got {}",
                self.n_inputs(),
                inputs.len()
            )));
        }
        let mut wires = vec![false; self.n_wires];
        wires[..inputs.len()].copy_from_slice(inputs);
        for g in &self.gates {
            let a = wires[g.inputs[0]];
            let b = g.inputs.get(1).map(|&w| wires[w]).unwrap_or(false);
            wires[g.output] = g.kind.eval(a, b);
        }
        Ok(wires[self.output_wires()].to_vec())
    }

    pub fn to_bristol(&self) -> String {
        let mut out = format!("{} {}\n", self.gates.len(), self.n_wires);
        // Blocks are positional, so an empty first block is still written.
        let [a, b] = self.input_widths;
        out.push_str(&match (a, b) {
            (0, 0) => "0".to_string(),
            (a, 0) => format!("1 {a}"),
            (a, b) => format!("2 {a} {b}"),
        });
        out.push_str(&format!("\n1 {}\n\n", self.output_width));
        for g in &self.gates {
            let ins: Vec<String> = g.inputs.iter().map(|w| w.to_string()).collect();
            out.push_str(&format!("{} 1 {} {} {}\n", g.inputs.len(), ins.join(" "), g.output, g.kind.name()));
        }
        out
    }
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|t| {
            t.parse::<usize>()
                .map_err(|_| Error::Parse { line: lineno, message: format!("expected an integer, found '{t}'") })
        })
        .collect()
}

/// Parses Bristol-fashion text:
///
/// ```text
/// <gates> <wires>
/// <n_input_blocks> <width>...     (at most two blocks)
/// <n_output_blocks> <width>...
///
/// <n_in> <n_out> <in wires...> <out wire> AND|XOR|INV
/// ```
pub fn parse_bristol(text: &str) -> Result<BooleanCircuit> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());

    let header_err = |line: usize, message: &str| Error::Parse { line, message: message.to_string() };
    let (l1, h1) = lines.next().ok_or_else(|| header_err(1, "empty circuit file"))?;
    let h1 = parse_numbers(h1, l1)?;
    let [n_gates, n_wires] = h1[..] else {
        return Err(header_err(l1, "header must be '<gates> <wires>'"));
    };

    let (l2, h2) = lines.next().ok_or_else(|| header_err(l1 + 1, "missing input header"))?;
    let h2 = parse_numbers(h2, l2)?;
    if h2.is_empty() || h2[0] != h2.len() - 1 || h2[0] > 2 {
        return Err(header_err(l2, "input header must be '<count> <width>...' with at most two blocks"));
    }
    let input_widths = [h2.get(1).copied().unwrap_or(0), h2.get(2).copied().unwrap_or(0)];

    let (l3, h3) = lines.next().ok_or_else(|| header_err(l2 + 1, "missing output header"))?;
    let h3 = parse_numbers(h3, l3)?;
    if h3.is_empty() || h3[0] != h3.len() - 1 {
        return Err(header_err(l3, "output header must be '<count> <width>...'"));
    }
    let output_width: usize = h3[1..].iter().sum();

    let n_in = input_widths[0] + input_widths[1];
    if n_in > n_wires || output_width > n_wires {
        return Err(header_err(l2, "input/output widths exceed wire count"));
    }

    let mut assigned = vec![false; n_wires];
    assigned[..n_in].fill(true);
    let mut gates = Vec::with_capacity(n_gates);
    let mut seen_outputs = HashSet::new();
    let mut last_line = l3;
    for (lineno, line) in lines {
        last_line = lineno;
        let err = |message: String| Error::Parse { line: lineno, message };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let kind = match *tokens.last().expect("non-empty line") {
            "AND" => GateKind::And,
            "XOR" => GateKind::Xor,
            "INV" | "NOT" => GateKind::Inv,
            other => return Err(err(format!("unknown gate kind '{other}'"))),
        };
        let nums = parse_numbers(&tokens[..tokens.len() - 1].join(" "), lineno)?;
        if nums.len() < 2 || nums[1] != 1 || nums[0] != kind.arity() || nums.len() != 2 + nums[0] + 1 {
            return Err(err(format!("malformed {} gate line", kind.name())));
        }
        let inputs = nums[2..2 + nums[0]].to_vec();
        let output = nums[2 + nums[0]];
        for &w in inputs.iter().chain(std::iter::once(&output)) {
            if w >= n_wires {
                return Err(err(format!("wire {w} out of range (n_wires = {n_wires})")));
            }
        }
        for &w in &inputs {
            if !assigned[w] {
                return Err(err(format!("dangling wire {w} read before assignment")));
            }
        }
        if assigned[output] || !seen_outputs.insert(output) {
            return Err(err(format!("wire {output} assigned twice")));
        }
        assigned[output] = true;
        gates.push(Gate { kind, inputs, output });
    }
    if gates.len() != n_gates {
        return Err(Error::Parse {
            line: l1,
            message: format!("header declares {n_gates} gates, found {}", gates.len()),
        });
    }
    if let Some(w) = (n_wires - output_width..n_wires).find(|&w| !assigned[w]) {
        return Err(Error::Parse { line: last_line, message: format!("output wire {w} never assigned") });
    }
    BooleanCircuit::new(n_wires, gates, input_widths, output_width)
        .map_err(|e| Error::Parse { line: l1, message: e.to_string() })
}

/// `width` bits of `value`, least significant first.
pub fn bits_from_u64(value: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| i < 64 && (value >> i) & 1 == 1).collect()
}

/// Inverse of [`bits_from_u64`].
pub fn u64_from_bits(bits: &[bool]) -> u64 {
    bits.iter().take(64).enumerate().fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_gate_and() {
        let c = parse_bristol("1 3\n2 1 1\n1 1\n\n2 1 0 1 2 AND\n").unwrap();
        assert_eq!(c.n_wires(), 3);
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.plain_eval(&[true, true]).unwrap(), vec![true]);
        assert_eq!(c.plain_eval(&[false, true]).unwrap(), vec![false]);
    }

    #[test]
    fn header_errors_name_line_one() {
        for text in ["x 3\n", "1\n2 1 1\n1 1\n2 1 0 1 2 AND\n", ""] {
            match parse_bristol(text) {
                Err(Error::Parse { line, .. }) => assert_eq!(line, 1, "{text:?}"),
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn gate_errors_carry_line_numbers() {
        let cases = [
            ("1 3\n2 1 1\n1 1\n\n2 1 0 1 2 OR\n", 5, "unknown"),
            ("1 4\n2 1 1\n1 1\n\n2 1 0 2 3 AND\n", 5, "dangling"),
            ("2 4\n2 1 1\n1 1\n\n2 1 0 1 3 AND\n2 1 0 1 3 XOR\n", 6, "twice"),
            ("1 3\n2 1 1\n1 1\n\n2 1 0 1 7 AND\n", 5, "range"),
            ("1 3\n2 1 1\n1 1\n\n2 1 0 1 1 AND\n", 5, "twice"),
        ];
        for (text, want, needle) in cases {
            match parse_bristol(text) {
                Err(Error::Parse { line, message }) => {
                    assert_eq!(line, want, "{text:?}");
                    assert!(message.contains(needle), "{message}");
                }
                other => panic!("{text:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn bristol_roundtrip() {
        let text = "3 5\n2 1 1\n1 1\n\n2 1 0 1 2 XOR\n1 1 2 3 INV\n2 1 3 0 4 AND\n";
        let c = parse_bristol(text).unwrap();
        assert_eq!(parse_bristol(&c.to_bristol()).unwrap(), c);
    }

    #[test]
    fn bit_helpers() {
        assert_eq!(bits_from_u64(6, 4), vec![false, true, true, false]);
        assert_eq!(u64_from_bits(&bits_from_u64(0xa5, 8)), 0xa5);
    }
}
