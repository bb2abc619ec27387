//! Line-based text format for instances (`.flq`).
//!
//! ```text
//! flq 1
//! meta L=<int> n=<int> alpha=<decimal> R=<int|inf> k=<int> seed=<u64> planted=<int>
//! mask <broken qubits, comma separated>        (only when some qubit is broken)
//! J <i> <j> <value>                            (nonzero couplings, i < j, sorted)
//! h <i> <value>                                (nonzero biases, sorted)
//! loop <v1,v2,...,vl> afm=<i>-<j>              (generation order)
//! ```
//!
//! Files are UTF-8 with LF endings. Reading accepts only the canonical form,
//! so `write(read(bytes)) == bytes` for every file that reads successfully.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::chimera::ChimeraTopology;
use crate::error::{Error, Result};
use crate::instance::{Alpha, FrustratedLoopInstance, Loop, RangeLimit};

pub const MAGIC: &str = "flq 1";

pub fn write_instance(inst: &FrustratedLoopInstance) -> String {
    let topo = &inst.topology;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    writeln!(
        out,
        "meta L={} n={} alpha={} R={} k={} seed={} planted={}",
        topo.size(),
        topo.num_functional(),
        inst.alpha,
        inst.range,
        inst.num_loops(),
        inst.seed,
        inst.planted_energy
    )
    .unwrap();
    let broken = topo.broken_qubits();
    if !broken.is_empty() {
        out.push_str("mask ");
        out.push_str(&join(broken.iter()));
        out.push('\n');
    }
    for (&(a, b), &j) in topo.edges().iter().zip(&inst.couplings) {
        if j != 0 {
            writeln!(out, "J {a} {b} {j}").unwrap();
        }
    }
    for lp in &inst.loops {
        writeln!(out, "loop {} afm={}-{}", join(lp.vertices.iter()), lp.afm_edge.0, lp.afm_edge.1).unwrap();
    }
    out
}

fn join<T: ToString>(items: impl Iterator<Item = T>) -> String {
    items.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

fn num<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    // reject forms like "+3" or "007" that would not survive a rewrite
    let canonical = !s.is_empty()
        && !s.starts_with('+')
        && !(s.len() > 1 && s.starts_with('0'))
        && !(s.len() > 2 && s.starts_with("-0"));
    if !canonical {
        return Err(parse_err(line, format!("non-canonical {what} `{s}`")));
    }
    s.parse().map_err(|_| parse_err(line, format!("bad {what} `{s}`")))
}

struct Meta {
    size: usize,
    n: usize,
    alpha: Alpha,
    range: RangeLimit,
    k: usize,
    seed: u64,
    planted: i64,
}

fn parse_meta(text: &str, line: usize) -> Result<Meta> {
    let keys = ["L", "n", "alpha", "R", "k", "seed", "planted"];
    let rest = text.strip_prefix("meta ").ok_or_else(|| parse_err(line, "expected `meta` line"))?;
    let fields: Vec<&str> = rest.split(' ').collect();
    if fields.len() != keys.len() {
        return Err(parse_err(line, format!("meta needs {} fields", keys.len())));
    }
    let mut values = Vec::with_capacity(keys.len());
    for (field, key) in fields.iter().zip(keys) {
        let v = field
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| parse_err(line, format!("expected `{key}=` in meta")))?;
        values.push(v);
    }
    let alpha: Alpha = values[2].parse().map_err(|e| parse_err(line, format!("{e}")))?;
    if alpha.to_string() != values[2] {
        return Err(parse_err(line, format!("non-canonical alpha `{}`", values[2])));
    }
    let range: RangeLimit = if values[3] == "inf" {
        RangeLimit::Unlimited
    } else {
        RangeLimit::limited(num(values[3], line, "range")?).map_err(|e| parse_err(line, e.to_string()))?
    };
    Ok(Meta {
        size: num(values[0], line, "L")?,
        n: num(values[1], line, "n")?,
        alpha,
        range,
        k: num(values[4], line, "k")?,
        seed: num(values[5], line, "seed")?,
        planted: num(values[6], line, "planted")?,
    })
}

/// Parse an instance and check every construction invariant.
pub fn read_instance(text: &str) -> Result<FrustratedLoopInstance> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| parse_err(text.lines().count().max(1), "missing final newline"))?;
    let mut lines = body.split('\n').enumerate().map(|(i, l)| (i + 1, l)).peekable();

    match lines.next() {
        Some((_, MAGIC)) => {}
        Some((ln, other)) => return Err(parse_err(ln, format!("expected `{MAGIC}`, found `{other}`"))),
        None => return Err(parse_err(1, "empty input")),
    }
    let (ln, meta_line) = lines.next().ok_or_else(|| parse_err(2, "missing meta line"))?;
    let meta = parse_meta(meta_line, ln)?;

    let mut topology = ChimeraTopology::build(meta.size).map_err(|e| parse_err(ln, e.to_string()))?;
    if let Some(&(ln, l)) = lines.peek() {
        if let Some(list) = l.strip_prefix("mask ") {
            lines.next();
            let broken = list
                .split(',')
                .map(|v| num::<usize>(v, ln, "qubit"))
                .collect::<Result<Vec<_>>>()?;
            if broken.windows(2).any(|w| w[0] >= w[1]) {
                return Err(parse_err(ln, "mask must be strictly increasing"));
            }
            topology = topology.with_broken(&broken).map_err(|e| parse_err(ln, e.to_string()))?;
        }
    }
    if topology.num_functional() != meta.n {
        return Err(Error::Validation(format!(
            "meta declares n={} but the mask leaves {}",
            meta.n,
            topology.num_functional()
        )));
    }

    let mut couplings = vec![0i64; topology.num_edges()];
    let mut last_edge: Option<usize> = None;
    let mut loops = Vec::new();
    for (ln, l) in lines {
        let mut parts = l.split(' ');
        match parts.next() {
            Some("J") if loops.is_empty() => {
                let toks: Vec<&str> = parts.collect();
                if toks.len() != 3 {
                    return Err(parse_err(ln, "coupling line needs `J i j value`"));
                }
                let (a, b): (usize, usize) = (num(toks[0], ln, "qubit")?, num(toks[1], ln, "qubit")?);
                let v: i64 = num(toks[2], ln, "coupling")?;
                if a >= b {
                    return Err(parse_err(ln, "coupling endpoints must satisfy i < j"));
                }
                let e = topology
                    .edge_index(a, b)
                    .ok_or_else(|| parse_err(ln, format!("no coupler {a}-{b} in topology")))?;
                if last_edge.is_some_and(|p| p >= e) {
                    return Err(parse_err(ln, "coupling lines must be sorted and unique"));
                }
                if v == 0 {
                    return Err(parse_err(ln, "zero couplings are not listed"));
                }
                last_edge = Some(e);
                couplings[e] = v;
            }
            Some("h") if loops.is_empty() => {
                return Err(Error::Validation(format!("line {ln}: frustrated-loop instances have no biases")));
            }
            Some("loop") => {
                let toks: Vec<&str> = parts.collect();
                if toks.len() != 2 {
                    return Err(parse_err(ln, "loop line needs `loop v1,...,vl afm=i-j`"));
                }
                let vertices = toks[0]
                    .split(',')
                    .map(|v| num::<u32>(v, ln, "vertex"))
                    .collect::<Result<Vec<_>>>()?;
                let (a, b) = toks[1]
                    .strip_prefix("afm=")
                    .and_then(|r| r.split_once('-'))
                    .ok_or_else(|| parse_err(ln, "expected `afm=i-j`"))?;
                let afm_edge = (num(a, ln, "vertex")?, num(b, ln, "vertex")?);
                if afm_edge.0 >= afm_edge.1 {
                    return Err(parse_err(ln, "afm endpoints must satisfy i < j"));
                }
                loops.push(Loop { vertices, afm_edge });
            }
            _ => return Err(parse_err(ln, format!("unexpected line `{l}`"))),
        }
    }

    if loops.len() != meta.k {
        return Err(Error::Validation(format!("meta declares k={} but {} loops follow", meta.k, loops.len())));
    }
    let inst = FrustratedLoopInstance {
        topology: Arc::new(topology),
        couplings,
        loops,
        range: meta.range,
        alpha: meta.alpha,
        seed: meta.seed,
        planted_energy: meta.planted,
    };
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_instance, LoopPolicy};

    fn sample(l: usize, broken: &[usize], seed: u64) -> FrustratedLoopInstance {
        let topo = Arc::new(ChimeraTopology::build(l).unwrap().with_broken(broken).unwrap());
        generate_instance(&topo, "0.25".parse().unwrap(), RangeLimit::Limited(2), LoopPolicy::CellRejection, seed)
            .unwrap()
    }

    #[test]
    fn empty_instance_is_header_only() {
        let topo = Arc::new(ChimeraTopology::build(1).unwrap());
        let inst = generate_instance(&topo, "0.01".parse().unwrap(), RangeLimit::Unlimited, LoopPolicy::HenMinLength, 3)
            .unwrap();
        let text = write_instance(&inst);
        assert_eq!(text, "flq 1\nmeta L=1 n=8 alpha=0.01 R=inf k=0 seed=3 planted=0\n");
        assert_eq!(read_instance(&text).unwrap(), inst);
    }

    #[test]
    fn round_trip_with_mask() {
        let inst = sample(3, &[5, 17, 40], 12);
        let text = write_instance(&inst);
        assert!(text.lines().nth(2).unwrap() == "mask 5,17,40");
        let back = read_instance(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(write_instance(&back), text);
    }

    #[test]
    fn declared_range_is_enforced() {
        let inst = sample(2, &[], 1);
        let text = write_instance(&inst);
        // bump one coupling to 3: both range and loop-sum checks must fire
        let line = text.lines().find(|l| l.starts_with("J ")).unwrap();
        let mut parts: Vec<&str> = line.split(' ').collect();
        parts[3] = "3";
        let bad = text.replace(line, &parts.join(" "));
        assert!(matches!(read_instance(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let inst = sample(2, &[], 2);
        let text = write_instance(&inst);
        let cases = [
            (text.replacen("flq 1", "flq 2", 1), 1),
            (text.replacen("meta L=2", "meta L=x", 1), 2),
            (text.replacen("\nJ ", "\nQ ", 1), 3),
        ];
        for (bad, line) in cases {
            match read_instance(&bad) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line),
                other => panic!("expected parse error, got {other:?}"),
            }
        }
        assert!(read_instance(text.trim_end()).is_err());
        assert!(read_instance("").is_err());
    }

    #[test]
    fn unsorted_couplings_are_rejected() {
        let inst = sample(2, &[], 3);
        let text = write_instance(&inst);
        let mut lines: Vec<&str> = text.lines().collect();
        let first_j = lines.iter().position(|l| l.starts_with("J ")).unwrap();
        lines.swap(first_j, first_j + 1);
        let shuffled = lines.join("\n") + "\n";
        assert!(matches!(read_instance(&shuffled), Err(Error::Parse { .. })));
    }
}
