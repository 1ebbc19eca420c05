//! Line-oriented text checkpoints of a tree and its step counter.
//!
//! ```text
//! idt-checkpoint 1
//! config <p> <A> <a> <delta> <depth_cap>
//! steps <t>
//! nodes <count>
//! node <label> <alpha> <parent|-> <child0|-> <child1|-> <logL> <logP>
//! lower <p reals>
//! upper <p reals>
//! closed <p flags>
//! rls <updates> <w: dim reals>
//! rreg <dim*dim reals, row-major>
//! rinv <dim*dim reals, row-major>
//! buffer <k>
//! sample <t> <d|-> <p reals>        (k lines)
//! ```
//!
//! Reals are written with 17 significant digits, so a write/read cycle
//! reproduces every value bit for bit. Nodes appear in creation order.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};

use crate::datagen::format_decimal;
use crate::error::{Error, Result};
use crate::label::NodeLabel;
use crate::region::Region;
use crate::rls::RlsState;
use crate::tree::{BufferedSample, Tree, TreeConfig, TreeNode};

const MAGIC: &str = "idt-checkpoint 1";

fn join(values: impl IntoIterator<Item = f64>) -> String {
    values.into_iter().map(format_decimal).collect::<Vec<_>>().join(" ")
}

fn opt_id(id: Option<usize>) -> String {
    id.map_or("-".into(), |i| i.to_string())
}

pub fn write_checkpoint(tree: &Tree, steps: u64, mut out: impl Write) -> Result<()> {
    let c = tree.config();
    writeln!(out, "{MAGIC}")?;
    writeln!(
        out,
        "config {} {} {} {} {}",
        c.p,
        format_decimal(c.bound),
        format_decimal(c.a),
        format_decimal(c.delta),
        c.depth_cap
    )?;
    writeln!(out, "steps {steps}")?;
    writeln!(out, "nodes {}", tree.len())?;
    for n in tree.nodes() {
        let [c0, c1] = n.children.map_or([None, None], |[a, b]| [Some(a), Some(b)]);
        writeln!(
            out,
            "node {} {} {} {} {} {} {}",
            n.label,
            n.alpha,
            opt_id(n.parent),
            opt_id(c0),
            opt_id(c1),
            format_decimal(n.log_l),
            format_decimal(n.log_p)
        )?;
        writeln!(out, "lower {}", join(n.region.lower.iter().copied()))?;
        writeln!(out, "upper {}", join(n.region.upper.iter().copied()))?;
        let closed: Vec<&str> = n.region.upper_closed().iter().map(|&b| if b { "1" } else { "0" }).collect();
        writeln!(out, "closed {}", closed.join(" "))?;
        writeln!(out, "rls {} {}", n.rls.updates(), join(n.rls.weights().iter().copied()))?;
        writeln!(out, "rreg {}", join(n.rls.regularized_moment().transpose().iter().copied()))?;
        writeln!(out, "rinv {}", join(n.rls.inverse().transpose().iter().copied()))?;
        writeln!(out, "buffer {}", n.buffer.len())?;
        for s in &n.buffer {
            let d = s.d.map_or("-".into(), format_decimal);
            writeln!(out, "sample {} {} {}", s.t, d, join(s.x.iter().copied()))?;
        }
    }
    Ok(())
}

struct Reader<R> {
    lines: std::io::Lines<R>,
    line_no: usize,
    current: String,
}

impl<R: BufRead> Reader<R> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Checkpoint {
            line: self.line_no,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<()> {
        self.line_no += 1;
        match self.lines.next() {
            Some(line) => {
                self.current = line?;
                Ok(())
            }
            None => Err(self.err("unexpected end of checkpoint")),
        }
    }

    /// Reads the next line, checks its keyword and returns the fields after it.
    fn record(&mut self, key: &str) -> Result<Vec<String>> {
        self.next_line()?;
        let mut fields = self.current.split_whitespace();
        if fields.next() != Some(key) {
            return Err(self.err(format!("expected `{key}` record")));
        }
        Ok(fields.map(str::to_owned).collect())
    }

    fn parse<T: std::str::FromStr>(&self, field: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("cannot parse {field:?}")))
    }

    fn reals(&self, fields: &[String], expected: usize) -> Result<Vec<f64>> {
        if fields.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", fields.len())));
        }
        fields.iter().map(|f| self.parse(f)).collect()
    }

    fn opt_id(&self, field: &str) -> Result<Option<usize>> {
        if field == "-" {
            Ok(None)
        } else {
            self.parse(field).map(Some)
        }
    }
}

/// Parses a checkpoint, returning the tree and the number of steps processed.
pub fn read_checkpoint(input: impl BufRead) -> Result<(Tree, u64)> {
    let mut r = Reader {
        lines: input.lines(),
        line_no: 0,
        current: String::new(),
    };
    r.next_line()?;
    if r.current.trim() != MAGIC {
        return Err(r.err("not a checkpoint file"));
    }
    let f = r.record("config")?;
    if f.len() != 5 {
        return Err(r.err("config needs p, A, a, delta and depth cap"));
    }
    let p: usize = r.parse(&f[0])?;
    let config = TreeConfig::new(p, r.parse(&f[1])?)
        .with_a(r.parse(&f[2])?)
        .with_delta(r.parse(&f[3])?)
        .with_depth_cap(f[4].parse().map_err(|_| r.err("bad depth cap"))?);
    config.validate().map_err(|e| r.err(e.to_string()))?;
    let f = r.record("steps")?;
    let steps: u64 = r.parse(f.first().ok_or_else(|| r.err("missing step count"))?)?;
    let f = r.record("nodes")?;
    let count: usize = r.parse(f.first().ok_or_else(|| r.err("missing node count"))?)?;
    if count == 0 {
        return Err(r.err("a tree has at least one node"));
    }

    let mut nodes = Vec::with_capacity(count);
    for _ in 0..count {
        let f = r.record("node")?;
        if f.len() != 7 {
            return Err(r.err("node record needs 7 fields"));
        }
        let label: NodeLabel = f[0].parse().map_err(|_| r.err("bad label"))?;
        let alpha: u8 = r.parse(&f[1])?;
        let parent = r.opt_id(&f[2])?;
        let children = match (r.opt_id(&f[3])?, r.opt_id(&f[4])?) {
            (Some(a), Some(b)) => Some([a, b]),
            (None, None) => None,
            _ => return Err(r.err("a node has zero or two children")),
        };
        let log_l: f64 = r.parse(&f[5])?;
        let log_p: f64 = r.parse(&f[6])?;

        let f = r.record("lower")?;
        let lower = r.reals(&f, p)?;
        let f = r.record("upper")?;
        let upper = r.reals(&f, p)?;
        let f = r.record("closed")?;
        if f.len() != p {
            return Err(r.err("closed record needs one flag per dimension"));
        }
        let closed = f
            .iter()
            .map(|v| match v.as_str() {
                "0" => Ok(false),
                "1" => Ok(true),
                _ => Err(r.err("flags are 0 or 1")),
            })
            .collect::<Result<Vec<_>>>()?;

        let f = r.record("rls")?;
        if f.is_empty() {
            return Err(r.err("missing update count"));
        }
        let updates: u64 = r.parse(&f[0])?;
        let w = r.reals(&f[1..], p)?;
        let f = r.record("rreg")?;
        let rreg = r.reals(&f, p * p)?;
        let f = r.record("rinv")?;
        let rinv = r.reals(&f, p * p)?;

        let f = r.record("buffer")?;
        let k: usize = r.parse(f.first().ok_or_else(|| r.err("missing buffer size"))?)?;
        let mut buffer = Vec::with_capacity(k);
        for _ in 0..k {
            let f = r.record("sample")?;
            if f.len() != p + 2 {
                return Err(r.err("sample record needs t, d and x"));
            }
            let d = if f[1] == "-" { None } else { Some(r.parse(&f[1])?) };
            buffer.push(BufferedSample {
                t: r.parse(&f[0])?,
                d,
                x: r.reals(&f[2..], p)?,
            });
        }

        nodes.push(TreeNode {
            label,
            region: Region::from_parts(lower, upper, closed),
            alpha,
            buffer,
            log_l,
            log_p,
            rls: RlsState::from_parts(
                DMatrix::from_row_slice(p, p, &rreg),
                DMatrix::from_row_slice(p, p, &rinv),
                DVector::from_vec(w),
                updates,
            ),
            parent,
            children,
        });
    }
    check_links(&nodes).map_err(|msg| r.err(msg))?;
    Ok((Tree::from_nodes(config, nodes), steps))
}

fn check_links(nodes: &[TreeNode]) -> std::result::Result<(), String> {
    if nodes[0].parent.is_some() || !nodes[0].label.is_root() {
        return Err("first node must be the root".into());
    }
    for (id, n) in nodes.iter().enumerate() {
        if let Some([c0, c1]) = n.children {
            for (bit, c) in [(false, c0), (true, c1)] {
                let child = nodes.get(c).ok_or(format!("node {id} links to missing child {c}"))?;
                if c <= id || child.parent != Some(id) || child.label != n.label.child(bit) {
                    return Err(format!("inconsistent link between nodes {id} and {c}"));
                }
            }
        }
    }
    Ok(())
}
