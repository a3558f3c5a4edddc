//! Line-oriented instance text format.
//!
//! ```text
//! gcrp v1
//! n <int>
//! k <int>
//! dist
//! <n rows of n integers>
//! cluster <i> <v...>      (one per cluster, ids 0..k)
//! requiredV <v...>        (always present, possibly with no vertices)
//! requiredE <u> <v>       (one per required edge)
//! ends <i> <s> <t>        (optional, one per cluster; all or none)
//! ```
//!
//! All vertex ids are 0-based. `serialize_instance` emits a canonical form
//! (sorted clusters, sorted edge list) so equal instances produce identical
//! bytes; `parse_instance` accepts exactly this shape and reports the
//! offending line on failure.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{InstanceError, MetricInstance};
use crate::metric::{Cost, Metric};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: expected header 'gcrp v1'")]
    BadHeader { line: usize },
    #[error("line {line}: expected '{expected}'")]
    Expected { line: usize, expected: &'static str },
    #[error("line {line}: malformed field: {detail}")]
    Malformed { line: usize, detail: String },
    #[error("line {line}: distance row has {got} entries, expected {expected}")]
    Dimension {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: vertex {vertex} out of range (n = {n})")]
    VertexRange {
        line: usize,
        vertex: usize,
        n: usize,
    },
    #[error("line {line}: vertex {vertex} listed in more than one cluster")]
    Partition { line: usize, vertex: usize },
    #[error("vertex {vertex} belongs to no cluster")]
    Uncovered { vertex: usize },
    #[error("line {line}: endpoint {vertex} is outside cluster {cluster}")]
    EndpointOutsideCluster {
        line: usize,
        cluster: usize,
        vertex: usize,
    },
    #[error("line {line}: unexpected trailing content")]
    Trailing { line: usize },
    #[error("unexpected end of input: missing {0}")]
    Truncated(&'static str),
    #[error("instance error: {0}")]
    Instance(#[from] InstanceError),
}

struct Lines<'a> {
    iter: std::iter::Enumerate<std::str::Lines<'a>>,
    peeked: Option<Option<(usize, &'a str)>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            iter: text.lines().enumerate(),
            peeked: None,
        }
    }

    /// Next non-empty line as (1-based line number, content).
    fn next(&mut self) -> Option<(usize, &'a str)> {
        if let Some(p) = self.peeked.take() {
            return p;
        }
        self.advance()
    }

    fn peek(&mut self) -> Option<(usize, &'a str)> {
        if self.peeked.is_none() {
            let item = self.advance();
            self.peeked = Some(item);
        }
        self.peeked.unwrap()
    }

    fn advance(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.iter.by_ref() {
            let t = raw.trim();
            if !t.is_empty() {
                return Some((i + 1, t));
            }
        }
        None
    }
}

fn parse_usize(line: usize, tok: &str) -> Result<usize, ParseError> {
    tok.parse::<usize>().map_err(|_| ParseError::Malformed {
        line,
        detail: format!("'{tok}' is not a non-negative integer"),
    })
}

fn parse_cost(line: usize, tok: &str) -> Result<Cost, ParseError> {
    tok.parse::<Cost>().map_err(|_| ParseError::Malformed {
        line,
        detail: format!("'{tok}' is not an integer"),
    })
}

pub fn parse_instance(text: &str) -> Result<MetricInstance, ParseError> {
    let mut lines = Lines::new(text);

    let (ln, header) = lines.next().ok_or(ParseError::Truncated("header"))?;
    if header != "gcrp v1" {
        return Err(ParseError::BadHeader { line: ln });
    }

    let (ln, nline) = lines.next().ok_or(ParseError::Truncated("n"))?;
    let n = match nline.strip_prefix("n ") {
        Some(rest) => parse_usize(ln, rest.trim())?,
        None => {
            return Err(ParseError::Expected {
                line: ln,
                expected: "n <int>",
            })
        }
    };
    let (ln, kline) = lines.next().ok_or(ParseError::Truncated("k"))?;
    let k = match kline.strip_prefix("k ") {
        Some(rest) => parse_usize(ln, rest.trim())?,
        None => {
            return Err(ParseError::Expected {
                line: ln,
                expected: "k <int>",
            })
        }
    };

    let (ln, dline) = lines.next().ok_or(ParseError::Truncated("dist"))?;
    if dline != "dist" {
        return Err(ParseError::Expected {
            line: ln,
            expected: "dist",
        });
    }
    let mut dist = Vec::with_capacity(n * n);
    for row in 0..n {
        let (ln, rline) = match lines.next() {
            Some(x) => x,
            None => return Err(ParseError::Truncated("distance row")),
        };
        let toks: Vec<&str> = rline.split_whitespace().collect();
        if toks.len() != n {
            return Err(ParseError::Dimension {
                line: ln,
                expected: n,
                got: toks.len(),
            });
        }
        for tok in toks {
            dist.push(parse_cost(ln, tok)?);
        }
        let _ = row;
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); k];
    let mut cluster_seen = vec![false; k];
    let mut covered = vec![Option::<usize>::None; n];
    for _ in 0..k {
        let (ln, cline) = lines.next().ok_or(ParseError::Truncated("cluster line"))?;
        let rest = cline.strip_prefix("cluster ").ok_or(ParseError::Expected {
            line: ln,
            expected: "cluster <i> <v...>",
        })?;
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if toks.is_empty() {
            return Err(ParseError::Malformed {
                line: ln,
                detail: "missing cluster id".into(),
            });
        }
        let id = parse_usize(ln, toks[0])?;
        if id >= k || cluster_seen[id] {
            return Err(ParseError::Malformed {
                line: ln,
                detail: format!("bad or repeated cluster id {id}"),
            });
        }
        cluster_seen[id] = true;
        if toks.len() == 1 {
            return Err(ParseError::Malformed {
                line: ln,
                detail: format!("cluster {id} is empty"),
            });
        }
        for tok in &toks[1..] {
            let v = parse_usize(ln, tok)?;
            if v >= n {
                return Err(ParseError::VertexRange {
                    line: ln,
                    vertex: v,
                    n,
                });
            }
            if covered[v].is_some() {
                return Err(ParseError::Partition {
                    line: ln,
                    vertex: v,
                });
            }
            covered[v] = Some(id);
            clusters[id].push(v);
        }
    }
    for (v, c) in covered.iter().enumerate() {
        if c.is_none() {
            return Err(ParseError::Uncovered { vertex: v });
        }
    }

    let (ln, vline) = lines.next().ok_or(ParseError::Truncated("requiredV"))?;
    if vline != "requiredV" && !vline.starts_with("requiredV ") {
        return Err(ParseError::Expected {
            line: ln,
            expected: "requiredV <v...>",
        });
    }
    let mut required_v = BTreeSet::new();
    if let Some(rest) = vline.strip_prefix("requiredV ") {
        for tok in rest.split_whitespace() {
            let v = parse_usize(ln, tok)?;
            if v >= n {
                return Err(ParseError::VertexRange {
                    line: ln,
                    vertex: v,
                    n,
                });
            }
            required_v.insert(v);
        }
    }

    let mut required_e = Vec::new();
    while let Some((ln, eline)) = lines.peek() {
        let rest = match eline.strip_prefix("requiredE ") {
            Some(r) => r,
            None => break,
        };
        lines.next();
        let toks: Vec<&str> = rest.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(ParseError::Malformed {
                line: ln,
                detail: "requiredE takes exactly two vertices".into(),
            });
        }
        let u = parse_usize(ln, toks[0])?;
        let v = parse_usize(ln, toks[1])?;
        for x in [u, v] {
            if x >= n {
                return Err(ParseError::VertexRange {
                    line: ln,
                    vertex: x,
                    n,
                });
            }
        }
        required_e.push((u, v));
    }

    let mut endpoints: Option<Vec<(usize, usize)>> = None;
    if matches!(lines.peek(), Some((_, l)) if l.starts_with("ends ")) {
        let mut ends = vec![None; k];
        for _ in 0..k {
            let (ln, eline) = lines.next().ok_or(ParseError::Truncated("ends line"))?;
            let rest = eline.strip_prefix("ends ").ok_or(ParseError::Expected {
                line: ln,
                expected: "ends <i> <s> <t>",
            })?;
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(ParseError::Malformed {
                    line: ln,
                    detail: "ends takes cluster id plus two vertices".into(),
                });
            }
            let i = parse_usize(ln, toks[0])?;
            let s = parse_usize(ln, toks[1])?;
            let t = parse_usize(ln, toks[2])?;
            if i >= k || ends[i].is_some() {
                return Err(ParseError::Malformed {
                    line: ln,
                    detail: format!("bad or repeated ends id {i}"),
                });
            }
            for v in [s, t] {
                if v >= n {
                    return Err(ParseError::VertexRange {
                        line: ln,
                        vertex: v,
                        n,
                    });
                }
                if covered[v] != Some(i) {
                    return Err(ParseError::EndpointOutsideCluster {
                        line: ln,
                        cluster: i,
                        vertex: v,
                    });
                }
            }
            ends[i] = Some((s, t));
        }
        endpoints = Some(ends.into_iter().map(|e| e.unwrap()).collect());
    }

    if let Some((ln, _)) = lines.next() {
        return Err(ParseError::Trailing { line: ln });
    }

    Ok(MetricInstance::new(
        n, dist, clusters, required_v, required_e, endpoints,
    )?)
}

pub fn serialize_instance(inst: &MetricInstance) -> String {
    let n = inst.n();
    let mut out = String::new();
    out.push_str("gcrp v1\n");
    let _ = writeln!(out, "n {n}");
    let _ = writeln!(out, "k {}", inst.k());
    out.push_str("dist\n");
    for u in 0..n {
        let row: Vec<String> = (0..n).map(|v| inst.dist(u, v).to_string()).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    for (i, c) in inst.clusters().iter().enumerate() {
        let vs: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "cluster {i} {}", vs.join(" "));
    }
    if inst.required_vertices().is_empty() {
        out.push_str("requiredV\n");
    } else {
        let vs: Vec<String> = inst
            .required_vertices()
            .iter()
            .map(|v| v.to_string())
            .collect();
        let _ = writeln!(out, "requiredV {}", vs.join(" "));
    }
    for &(u, v) in inst.required_edges() {
        let _ = writeln!(out, "requiredE {u} {v}");
    }
    if let Some(ends) = inst.endpoints() {
        for (i, &(s, t)) in ends.iter().enumerate() {
            let _ = writeln!(out, "ends {i} {s} {t}");
        }
    }
    out
}
