//! graph6 text codec. Data bits follow the column-major upper triangle, the
//! same order as the lex string.

use super::{pair_count, slot_pair, Graph, GraphError, MAX_ORDER};

pub fn encode(g: &Graph) -> String {
    let n = g.order();
    let mut out = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else {
        out.push(126);
        for shift in [12, 6, 0] {
            out.push(((n >> shift) & 63) as u8 + 63);
        }
    }
    let bits = g.lex_bits();
    for chunk in bits.chunks(6) {
        let mut v = 0u8;
        for (t, &b) in chunk.iter().enumerate() {
            if b {
                v |= 1 << (5 - t);
            }
        }
        out.push(v + 63);
    }
    String::from_utf8(out).expect("graph6 is printable ASCII")
}

pub fn decode(text: &str) -> Result<Graph, GraphError> {
    let err = |offset: usize, reason: &str| GraphError::Graph6 {
        offset,
        reason: reason.to_string(),
    };
    let bytes = text.trim_end_matches(['\n', '\r']).as_bytes();
    let mut pos = 0;
    if bytes.starts_with(b">>graph6<<") {
        pos = 10;
    }
    for (i, &b) in bytes.iter().enumerate().skip(pos) {
        if !(63..=126).contains(&b) {
            return Err(err(i, "byte outside 63..=126"));
        }
    }
    let first = *bytes.get(pos).ok_or_else(|| err(pos, "empty input"))?;
    let n = if first < 126 {
        pos += 1;
        (first - 63) as usize
    } else {
        if bytes.get(pos + 1) == Some(&126) {
            return Err(err(pos + 1, "orders above 258047 unsupported"));
        }
        if bytes.len() < pos + 4 {
            return Err(err(bytes.len(), "truncated order header"));
        }
        let mut n = 0usize;
        for t in 1..4 {
            n = (n << 6) | (bytes[pos + t] - 63) as usize;
        }
        pos += 4;
        n
    };
    if n == 0 || n > MAX_ORDER {
        return Err(err(0, &format!("order {n} unsupported")));
    }
    let nbits = pair_count(n);
    let need = nbits.div_ceil(6);
    let data = &bytes[pos..];
    if data.len() != need {
        return Err(err(
            pos + data.len().min(need),
            &format!("expected {need} data bytes, found {}", data.len()),
        ));
    }
    let mut g = Graph::empty(n)?;
    for slot in 0..nbits {
        let byte = data[slot / 6] - 63;
        if (byte >> (5 - slot % 6)) & 1 == 1 {
            let (i, j) = slot_pair(slot);
            g.add_edge(i, j);
        }
    }
    // padding bits must be zero
    if nbits % 6 != 0 {
        let last = data[need - 1] - 63;
        if last & ((1u8 << (6 - nbits % 6)) - 1) != 0 {
            return Err(err(pos + need - 1, "nonzero padding bits"));
        }
    }
    Ok(g)
}
