//! Two- and three-site states assembled from measured spin correlators, with
//! closed-form nonlocality bounds for the translation-invariant XY symmetry
//! class (only T_xx, T_yy, T_zz, T_xy survive on two sites; T_zzz, T_zxx,
//! T_xzx, T_xxz on three).

use crate::chsh::{csv_err, parse_f64};
use crate::error::{Error, Result};
use crate::matrix::{pauli, ComplexMatrix, C64};
use crate::state::DensityMatrix;

fn check_range(what: &'static str, value: f64) -> Result<()> {
    if !(-1.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::OutOfRange {
            what,
            value,
            lo: -1.0,
            hi: 1.0,
        });
    }
    Ok(())
}

/// Two-site correlator tensor: diagonal channels plus the single symmetric
/// off-diagonal channel T_xy (entering on both xy and yx).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelatorTensor2 {
    pub t_xx: f64,
    pub t_yy: f64,
    pub t_zz: f64,
    pub t_xy: f64,
}

impl CorrelatorTensor2 {
    pub fn new(t_xx: f64, t_yy: f64, t_zz: f64, t_xy: f64) -> Result<Self> {
        check_range("T_xx", t_xx)?;
        check_range("T_yy", t_yy)?;
        check_range("T_zz", t_zz)?;
        check_range("T_xy", t_xy)?;
        Ok(Self {
            t_xx,
            t_yy,
            t_zz,
            t_xy,
        })
    }

    /// The singlet |psi^-><psi^-| has T_xx = T_yy = T_zz = -1, T_xy = 0.
    pub fn singlet() -> Self {
        Self {
            t_xx: -1.0,
            t_yy: -1.0,
            t_zz: -1.0,
            t_xy: 0.0,
        }
    }
}

/// 1/4 [I + T_xx sx(x)sx + T_yy sy(x)sy + T_zz sz(x)sz + T_xy (sx(x)sy + sy(x)sx)].
pub fn state_from_correlators2(t: &CorrelatorTensor2) -> Result<DensityMatrix> {
    let dim = 4;
    let mut m = ComplexMatrix::identity(dim);
    let channels: [(f64, usize, usize); 5] = [
        (t.t_xx, 0, 0),
        (t.t_yy, 1, 1),
        (t.t_zz, 2, 2),
        (t.t_xy, 0, 1),
        (t.t_xy, 1, 0),
    ];
    for (coeff, u, v) in channels {
        if coeff != 0.0 {
            m = m.add(&pauli(u).kron(&pauli(v)).scale(C64::new(coeff, 0.0)));
        }
    }
    DensityMatrix::new(m.scale(C64::new(0.25, 0.0))).map_err(|e| Error::NotAState {
        source: Box::new(e),
    })
}

/// Extract the four surviving two-site channels back out of a state via
/// Tr(rho s_u (x) s_v); inverse of `state_from_correlators2` on its image.
pub fn correlators_from_state2(rho: &DensityMatrix) -> Result<CorrelatorTensor2> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            got: rho.dim(),
        });
    }
    let channel = |u: usize, v: usize| rho.matrix().trace_product(&pauli(u).kron(&pauli(v))).re;
    Ok(CorrelatorTensor2 {
        t_xx: channel(0, 0),
        t_yy: channel(1, 1),
        t_zz: channel(2, 2),
        t_xy: channel(0, 1),
    })
}

/// Closed-form CHSH maximum for this symmetry class:
/// 2 sqrt(T_xx^2 + T_yy^2 + T_zz^2 - min(T_xx^2, T_yy^2, T_zz^2) + 2 T_xy^2).
///
/// Exact (equal to the correlation-matrix settings optimum) whenever
/// T_xy = 0; with a nonzero off-diagonal channel the discarded term should be
/// the smallest eigenvalue of T^T T rather than the smallest diagonal square,
/// so the expression is only an approximation there.
pub fn chsh_max_from_correlators(t: &CorrelatorTensor2) -> f64 {
    let sq = [t.t_xx * t.t_xx, t.t_yy * t.t_yy, t.t_zz * t.t_zz];
    let smallest = sq.iter().cloned().fold(f64::INFINITY, f64::min);
    2.0 * (sq.iter().sum::<f64>() - smallest + 2.0 * t.t_xy * t.t_xy).sqrt()
}

/// Three-site correlator tensor: the four channels entering the Mermin bound,
/// plus an optional complete 4x4x4 tensor (index 0 = identity, T_000 = 1)
/// for state reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelatorTensor3 {
    pub t_zzz: f64,
    pub t_zxx: f64,
    pub t_xzx: f64,
    pub t_xxz: f64,
    pub full: Option<Box<[[[f64; 4]; 4]; 4]>>,
}

impl CorrelatorTensor3 {
    pub fn new(t_zzz: f64, t_zxx: f64, t_xzx: f64, t_xxz: f64) -> Result<Self> {
        check_range("T_zzz", t_zzz)?;
        check_range("T_zxx", t_zxx)?;
        check_range("T_xzx", t_xzx)?;
        check_range("T_xxz", t_xxz)?;
        Ok(Self {
            t_zzz,
            t_zxx,
            t_xzx,
            t_xxz,
            full: None,
        })
    }

    /// Attach the complete tensor; its identity component must be 1 and the
    /// four named channels must agree with the scalar fields.
    pub fn with_full(mut self, full: [[[f64; 4]; 4]; 4]) -> Result<Self> {
        if (full[0][0][0] - 1.0).abs() > 1e-12 {
            return Err(Error::SchemaMismatch {
                details: format!("identity component T_000 must be 1, got {}", full[0][0][0]),
            });
        }
        // s_u index convention below: 1 = x, 2 = y, 3 = z
        let named = [
            (self.t_zzz, [3, 3, 3]),
            (self.t_zxx, [3, 1, 1]),
            (self.t_xzx, [1, 3, 1]),
            (self.t_xxz, [1, 1, 3]),
        ];
        for (value, [u, v, w]) in named {
            if (full[u][v][w] - value).abs() > 1e-12 {
                return Err(Error::SchemaMismatch {
                    details: format!(
                        "full tensor entry ({u},{v},{w}) = {} disagrees with named channel {value}",
                        full[u][v][w]
                    ),
                });
            }
        }
        self.full = Some(Box::new(full));
        Ok(self)
    }
}

/// 1/8 sum_uvw T_uvw s_u (x) s_v (x) s_w from the complete tensor; with only
/// the named channels, all other components are taken as zero.
pub fn state_from_correlators3(t: &CorrelatorTensor3) -> Result<DensityMatrix> {
    let op = |k: usize| {
        if k == 0 {
            ComplexMatrix::identity(2)
        } else {
            pauli(k - 1)
        }
    };
    let mut m = ComplexMatrix::zeros(8);
    let entry = |u: usize, v: usize, w: usize| -> f64 {
        match &t.full {
            Some(full) => full[u][v][w],
            None => match (u, v, w) {
                (0, 0, 0) => 1.0,
                (3, 3, 3) => t.t_zzz,
                (3, 1, 1) => t.t_zxx,
                (1, 3, 1) => t.t_xzx,
                (1, 1, 3) => t.t_xxz,
                _ => 0.0,
            },
        }
    };
    for u in 0..4 {
        for v in 0..4 {
            for w in 0..4 {
                let coeff = entry(u, v, w);
                if coeff != 0.0 {
                    m = m.add(&op(u).kron(&op(v)).kron(&op(w)).scale(C64::new(coeff, 0.0)));
                }
            }
        }
    }
    DensityMatrix::new(m.scale(C64::new(0.125, 0.0))).map_err(|e| Error::NotAState {
        source: Box::new(e),
    })
}

/// Extract the complete three-site tensor via Tr(rho s_u (x) s_v (x) s_w).
pub fn correlators_from_state3(rho: &DensityMatrix) -> Result<CorrelatorTensor3> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            got: rho.dim(),
        });
    }
    let op = |k: usize| {
        if k == 0 {
            ComplexMatrix::identity(2)
        } else {
            pauli(k - 1)
        }
    };
    let mut full = [[[0.0f64; 4]; 4]; 4];
    for (u, plane) in full.iter_mut().enumerate() {
        for (v, row) in plane.iter_mut().enumerate() {
            for (w, cell) in row.iter_mut().enumerate() {
                *cell = rho
                    .matrix()
                    .trace_product(&op(u).kron(&op(v)).kron(&op(w)))
                    .re;
            }
        }
    }
    CorrelatorTensor3::new(full[3][3][3], full[3][1][1], full[1][3][1], full[1][1][3])?
        .with_full(full)
}

/// Upper bound on the Mermin maximum for three-site states of this symmetry
/// class: sqrt(4 T_zzz^2 + 4 T_zxx^2 + 4 T_xzx^2 + 4 T_xxz^2).
pub fn mermin_bound_from_correlators(t: &CorrelatorTensor3) -> f64 {
    2.0 * (t.t_zzz * t.t_zzz + t.t_zxx * t.t_zxx + t.t_xzx * t.t_xzx + t.t_xxz * t.t_xxz).sqrt()
}

/// One labelled row of a two-site correlator file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow2 {
    pub site_config: String,
    pub tensor: CorrelatorTensor2,
}

/// One labelled row of a three-site correlator file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow3 {
    pub site_config: String,
    pub tensor: CorrelatorTensor3,
}

const HEADER2: [&str; 5] = ["site_config", "T_xx", "T_yy", "T_zz", "T_xy"];
const HEADER3: [&str; 5] = ["site_config", "T_zzz", "T_zxx", "T_xzx", "T_xxz"];

fn check_header(headers: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<_> = headers.iter().collect();
    // extra appended columns (e.g. computed bounds) are tolerated on re-read
    if got.len() < expected.len() || got[..expected.len()] != *expected {
        return Err(Error::SchemaMismatch {
            details: format!("expected leading columns {expected:?}, found {got:?}"),
        });
    }
    Ok(())
}

fn row_field<'a>(record: &'a csv::StringRecord, i: usize, line: u64) -> Result<&'a str> {
    record.get(i).ok_or_else(|| Error::SchemaMismatch {
        details: format!("row at line {line} has only {} columns", record.len()),
    })
}

/// Read rows matching the schema site_config,T_xx,T_yy,T_zz,T_xy.
pub fn read_correlators2_csv<R: std::io::Read>(input: R) -> Result<Vec<ChainRow2>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&r.headers().map_err(csv_err)?.clone(), &HEADER2)?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| parse_f64(row_field(&record, i, line)?);
        rows.push(ChainRow2 {
            site_config: row_field(&record, 0, line)?.to_string(),
            tensor: CorrelatorTensor2::new(num(1)?, num(2)?, num(3)?, num(4)?)?,
        });
    }
    Ok(rows)
}

/// Write rows in the schema site_config,T_xx,T_yy,T_zz,T_xy.
pub fn write_correlators2_csv<W: std::io::Write>(rows: &[ChainRow2], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER2).map_err(csv_err)?;
    for row in rows {
        let t = &row.tensor;
        w.write_record([
            row.site_config.clone(),
            format!("{:.9}", t.t_xx),
            format!("{:.9}", t.t_yy),
            format!("{:.9}", t.t_zz),
            format!("{:.9}", t.t_xy),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Read rows matching the schema site_config,T_zzz,T_zxx,T_xzx,T_xxz.
pub fn read_correlators3_csv<R: std::io::Read>(input: R) -> Result<Vec<ChainRow3>> {
    let mut r = csv::Reader::from_reader(input);
    check_header(&r.headers().map_err(csv_err)?.clone(), &HEADER3)?;
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| parse_f64(row_field(&record, i, line)?);
        rows.push(ChainRow3 {
            site_config: row_field(&record, 0, line)?.to_string(),
            tensor: CorrelatorTensor3::new(num(1)?, num(2)?, num(3)?, num(4)?)?,
        });
    }
    Ok(rows)
}

/// Write rows in the schema site_config,T_zzz,T_zxx,T_xzx,T_xxz.
pub fn write_correlators3_csv<W: std::io::Write>(rows: &[ChainRow3], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER3).map_err(csv_err)?;
    for row in rows {
        let t = &row.tensor;
        w.write_record([
            row.site_config.clone(),
            format!("{:.9}", t.t_zzz),
            format!("{:.9}", t.t_zxx),
            format!("{:.9}", t.t_xzx),
            format!("{:.9}", t.t_xxz),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
