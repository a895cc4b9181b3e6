//! Plain-text dump of assembled problems in standard form.
//!
//! ```text
//! # min 1/2 x'Px + q'x + constant  s.t.  Ax + s = b,  s in K
//! VARS <n>
//! ROWS <m>
//! CONSTANT <c>
//! CONES <count>
//! <Z|L+|Q|S> <dim>          one line per cone, in row order (S = PSD triangle, side dim)
//! Q <nnz>
//! <col> <value>             one line per nonzero of q
//! P <nnz>
//! <row> <col> <value>       upper triangle of P
//! A <nnz>
//! <row> <col> <value>
//! B <nnz>
//! <row> <value>
//! ```
//!
//! Indices are zero-based. PSD triangle cones pack the upper triangle column by
//! column with off-diagonal entries scaled by √2.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use clarabel::algebra::CscMatrix;
use clarabel::solver::SupportedConeT;

use super::StandardForm;
use crate::error::Result;

static COUNTER: AtomicUsize = AtomicUsize::new(0);

fn triplets(m: &CscMatrix<f64>) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::with_capacity(m.nzval.len());
    for col in 0..m.n {
        for idx in m.colptr[col]..m.colptr[col + 1] {
            out.push((m.rowval[idx], col, m.nzval[idx]));
        }
    }
    out
}

pub(crate) fn write(dir: &Path, form: &StandardForm) -> Result<()> {
    fs::create_dir_all(dir)?;
    let n = COUNTER.fetch_add(1, Ordering::Relaxed);
    let mut f = BufWriter::new(File::create(dir.join(format!("conic_{n:06}.txt")))?);
    writeln!(f, "# min 1/2 x'Px + q'x + constant  s.t.  Ax + s = b,  s in K")?;
    writeln!(f, "VARS {}", form.q.len())?;
    writeln!(f, "ROWS {}", form.b.len())?;
    writeln!(f, "CONSTANT {}", form.constant)?;
    writeln!(f, "CONES {}", form.cones.len())?;
    for cone in &form.cones {
        match cone {
            SupportedConeT::ZeroConeT(d) => writeln!(f, "Z {d}")?,
            SupportedConeT::NonnegativeConeT(d) => writeln!(f, "L+ {d}")?,
            SupportedConeT::SecondOrderConeT(d) => writeln!(f, "Q {d}")?,
            SupportedConeT::PSDTriangleConeT(d) => writeln!(f, "S {d}")?,
            other => writeln!(f, "# unsupported {other:?}")?,
        }
    }
    let q: Vec<_> = form.q.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
    writeln!(f, "Q {}", q.len())?;
    for (i, v) in q {
        writeln!(f, "{i} {v}")?;
    }
    for (tag, m) in [("P", &form.p), ("A", &form.a)] {
        let t = triplets(m);
        writeln!(f, "{tag} {}", t.len())?;
        for (r, c, v) in t {
            writeln!(f, "{r} {c} {v}")?;
        }
    }
    let b: Vec<_> = form.b.iter().enumerate().filter(|(_, v)| **v != 0.0).collect();
    writeln!(f, "B {}", b.len())?;
    for (i, v) in b {
        writeln!(f, "{i} {v}")?;
    }
    f.flush()?;
    Ok(())
}
