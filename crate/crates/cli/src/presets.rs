//! Frozen parameter grids of the paper figures.

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use ssmt_core::{Family, Procedure};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

impl FigureId {
    pub fn as_str(&self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
        }
    }
}

/// One Monte-Carlo curve family: a scenario swept over `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub family: Family,
    pub m: usize,
    pub m1: usize,
    pub mu: f64,
    pub alpha: f64,
    /// `(n, replicates before budget scaling)`
    pub cells: Vec<(usize, usize)>,
    pub procedures: Vec<Procedure>,
}

impl Panel {
    /// Procedures that can run at this `n`; the NTS-based ones need `n >= 1`.
    pub fn procedures_at(&self, n: usize) -> Vec<Procedure> {
        self.procedures
            .iter()
            .copied()
            .filter(|p| n > 0 || !p.needs_nts())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePreset {
    pub alpha: f64,
    pub k: Vec<usize>,
    pub n_grid: Vec<usize>,
    pub m_grid: Vec<usize>,
}

pub const STAR_N: usize = 2_300_000;
pub const STAR_M: usize = 3_300_000;

/// Half-decade grid from 1 to 1e8 plus the MUSE point.
fn log_grid(star: usize) -> Vec<usize> {
    let mut g: Vec<usize> = (0..=16).map(|i| 10f64.powf(i as f64 / 2.0).round() as usize).collect();
    g.push(star);
    g.sort_unstable();
    g.dedup();
    g
}

pub fn phase_preset() -> PhasePreset {
    PhasePreset {
        alpha: 0.2,
        k: vec![3, 100],
        n_grid: log_grid(STAR_N),
        m_grid: log_grid(STAR_M),
    }
}

fn cells(ns: impl IntoIterator<Item = usize>, reps: usize) -> Vec<(usize, usize)> {
    ns.into_iter().map(|n| (n, reps)).collect()
}

const SIZE_GRID_100: [usize; 15] = [1, 2, 5, 10, 20, 30, 50, 75, 100, 150, 200, 300, 400, 500, 1000];
const SIZE_GRID_1000: [usize; 14] = [10, 20, 50, 100, 200, 300, 500, 700, 1000, 2000, 5000, 10_000, 20_000, 50_000];

fn family_tag(f: Family) -> &'static str {
    match f {
        Family::GaussianNegEquicorr => "equicorr",
        _ => "iid",
    }
}

pub fn panels(id: FigureId) -> Vec<Panel> {
    use Procedure::*;
    match id {
        FigureId::Fig1 => Vec::new(),
        FigureId::Fig2 => vec![Panel {
            name: "fig2".into(),
            family: Family::GaussianNegEquicorr,
            m: 2,
            m1: 0,
            mu: 0.0,
            alpha: 0.5,
            cells: cells(0..=20, 1_000_000),
            procedures: vec![SsBh, OracleBh],
        }],
        FigureId::Fig3 => {
            let mut out = Vec::new();
            for (m, ns, reps) in [(2, 0..=20, 100_000), (10, 0..=40, 10_000)] {
                for family in [Family::GaussianIid, Family::GaussianNegEquicorr] {
                    out.push(Panel {
                        name: format!("fig3_{}_m{m}", family_tag(family)),
                        family,
                        m,
                        m1: 0,
                        mu: 0.0,
                        alpha: 0.5,
                        cells: cells(ns.clone(), reps),
                        procedures: vec![SsBh, OracleBh, NaiveBh],
                    });
                }
            }
            out
        }
        FigureId::Fig4 | FigureId::Fig5 => {
            let (tag, mus): (&str, [f64; 2]) = if id == FigureId::Fig4 { ("fig4", [1.0, 2.0]) } else { ("fig5", [1.0, 3.0]) };
            let mut out = Vec::new();
            for (m, reps) in [(10usize, 10_000usize), (100, 1_000)] {
                let ns: Vec<usize> = if m == 10 { (1..=50).collect() } else { SIZE_GRID_100.to_vec() };
                for mu in mus {
                    out.push(Panel {
                        name: format!("{tag}_m{m}_mu{mu}"),
                        family: Family::GaussianIid,
                        m,
                        m1: if id == FigureId::Fig4 { m / 2 } else { 1 },
                        mu,
                        alpha: 0.5,
                        cells: cells(ns.iter().copied(), reps),
                        procedures: vec![SsBh, OracleBh],
                    });
                }
            }
            out
        }
        FigureId::Fig6 => {
            let m = 1000usize;
            let universal = (2.0 * (m as f64).ln()).sqrt();
            [("fig6_dense", 500usize, 0.5 * universal), ("fig6_sparse", 10, universal)]
                .into_iter()
                .map(|(name, m1, mu)| Panel {
                    name: name.into(),
                    family: Family::GaussianIid,
                    m,
                    m1,
                    mu,
                    alpha: 0.2,
                    cells: SIZE_GRID_1000
                        .iter()
                        .map(|&n| (n, if n < 1000 { 1000 } else { 100 }))
                        .collect(),
                    procedures: vec![SsBh, OracleBh],
                })
                .collect()
        }
    }
}

/// Replicates for a cell: the caption count times the budget, at least one.
pub fn scaled_reps(base: usize, budget: f64) -> CliResult<usize> {
    if budget.is_nan() || budget <= 0.0 || budget.is_infinite() {
        return Err(CliError::usage(format!("--budget must be positive, got {budget}")));
    }
    Ok(((base as f64 * budget).round() as usize).max(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_match_the_captions() {
        let fig2 = &panels(FigureId::Fig2)[0];
        assert_eq!(fig2.cells.first(), Some(&(0, 1_000_000)));
        assert_eq!(fig2.cells.len(), 21);
        assert_eq!(fig2.procedures_at(0), vec![Procedure::OracleBh]);
        assert_eq!(panels(FigureId::Fig3).len(), 4);
        let fig6 = panels(FigureId::Fig6);
        assert!((fig6[0].mu - 1.8585).abs() < 1e-3 && (fig6[1].mu - 3.7169).abs() < 1e-3);
        assert!(fig6[0].cells.iter().all(|&(n, r)| r == if n < 1000 { 1000 } else { 100 }));
        let phase = phase_preset();
        assert!(phase.n_grid.contains(&STAR_N) && phase.m_grid.contains(&STAR_M));
    }

    #[test]
    fn budget_scaling() {
        assert_eq!(scaled_reps(1_000_000, 0.01).unwrap(), 10_000);
        assert_eq!(scaled_reps(100, 1e-9).unwrap(), 1);
        assert_eq!(scaled_reps(100, 0.0).unwrap_err().exit_code(), 1);
        assert!(scaled_reps(100, -1.0).is_err());
    }
}
