//! LP relaxation of keyword-language bidding.
//!
//! Per biddable phrase `s`:
//! * `W[s][i]`: mass of a broad bid at exactly `levels[s][i]`;
//! * `Z[s][i]`: mass of a broad bid at `levels[s][i]` or more;
//! * `R[s]`: mass of an exact bid at `c(s)`.
//!
//! A non-biddable query `q` gets a win variable `Y_q` squeezed between
//! `max Z` and `Σ Z` over the phrases matching it (at level `c(q)`). A
//! phrase wins itself with mass `Z[s][c(s)] + R[s]`; when other phrases
//! also match it, it gets a `Y` of its own bounded the same way.

use crate::model::{Instance, Money, WEIGHT_SCALE};
use crate::simplex::{self, LinearProgram, Relation, Status};

use super::KeywordError;

/// Broad-bid levels that matter for `s`: the distinct costs of `s` and of
/// everything it matches. A bid between two levels wins the same queries
/// as the lower one.
pub fn price_levels(inst: &Instance, s: usize) -> Vec<Money> {
    let mut levels: Vec<Money> = inst
        .matched_by(s)
        .iter()
        .chain(std::iter::once(&s))
        .map(|&q| inst.query(q).cost)
        .collect();
    levels.sort();
    levels.dedup();
    levels
}

/// All distinct costs in the instance.
pub fn global_price_levels(inst: &Instance) -> Vec<Money> {
    let mut levels: Vec<Money> = inst.queries().iter().map(|q| q.cost).collect();
    levels.sort();
    levels.dedup();
    levels
}

/// How a query is won in the LP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WinVar {
    /// No phrase can win it.
    Never,
    /// A phrase matched only by itself: `Z[s][c(s)] + R[s]`.
    Own,
    /// An explicit `Y` variable.
    Y(usize),
}

/// Variable layout of the relaxation.
#[derive(Debug, Clone)]
pub struct KeywordLp {
    pub lp: LinearProgram,
    pub levels: Vec<Vec<Money>>,
    pub(crate) w: Vec<Vec<usize>>,
    pub(crate) z: Vec<Vec<usize>>,
    pub(crate) r: Vec<Option<usize>>,
    pub(crate) win: Vec<WinVar>,
    scale: f64,
}

impl KeywordLp {
    pub fn keywords(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r.len()).filter(|&s| self.r[s].is_some())
    }

    fn level_index(&self, s: usize, price: Money) -> usize {
        self.levels[s]
            .binary_search(&price)
            .expect("price is a level of every matching phrase")
    }

    /// Pins every variable of `s` to one pure choice.
    pub fn fix_choice(&mut self, s: usize, choice: Choice) {
        let r = self.r[s].expect("biddable");
        let (exact, broad) = match choice {
            Choice::None => (0.0, None),
            Choice::Exact => (1.0, None),
            Choice::Broad(i) => (0.0, Some(i)),
        };
        self.lp.set_bounds(r, exact, exact);
        for (i, &w) in self.w[s].iter().enumerate() {
            let v = if broad == Some(i) { 1.0 } else { 0.0 };
            self.lp.set_bounds(w, v, v);
        }
    }

    /// Undoes [`fix_choice`](Self::fix_choice).
    pub fn release(&mut self, s: usize, allow_exact: bool) {
        let r = self.r[s].expect("biddable");
        self.lp
            .set_bounds(r, 0.0, if allow_exact { 1.0 } else { 0.0 });
        for &w in &self.w[s] {
            self.lp.set_bounds(w, 0.0, 1.0);
        }
    }
}

/// One keyword's pure strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Choice {
    None,
    Exact,
    /// Broad bid at `levels[s][i]`.
    Broad(usize),
}

/// Builds the relaxation. With `allow_exact` false every `R` is fixed at 0.
pub fn build_ilp_approx(inst: &Instance, allow_exact: bool) -> KeywordLp {
    let n = inst.len();
    let mut levels = vec![Vec::new(); n];
    let mut w = vec![Vec::new(); n];
    let mut z = vec![Vec::new(); n];
    let mut r = vec![None; n];
    let mut next = 0usize;
    let mut alloc = |count: usize| {
        let start = next;
        next += count;
        start..next
    };
    for s in inst.biddable() {
        levels[s] = price_levels(inst, s);
        let k = levels[s].len();
        w[s] = alloc(k).collect();
        z[s] = alloc(k).collect();
        r[s] = Some(alloc(1).start);
    }
    let mut win = vec![WinVar::Never; n];
    for (q, slot) in win.iter_mut().enumerate() {
        let others = inst.matchers(q).iter().any(|&s| s != q);
        *slot = if inst.query(q).biddable && !others {
            WinVar::Own
        } else if inst.matchers(q).is_empty() {
            WinVar::Never
        } else {
            WinVar::Y(alloc(1).start)
        };
    }

    let scale = inst
        .weights()
        .iter()
        .map(|w| w.raw().unsigned_abs())
        .max()
        .filter(|&m| m > 0)
        .unwrap_or(1) as f64;
    let mut lp = LinearProgram::new(next);
    let mut layout = KeywordLp {
        lp: LinearProgram::new(0),
        levels,
        w,
        z,
        r,
        win,
        scale,
    };

    for s in layout.keywords().collect::<Vec<_>>() {
        let k = layout.levels[s].len();
        let r_s = layout.r[s].unwrap();
        if !allow_exact {
            lp.set_bounds(r_s, 0.0, 0.0);
        }
        for i in 0..k {
            // Z^i = Σ_{t >= i} W^t
            let mut row = vec![(layout.z[s][i], 1.0)];
            row.extend((i..k).map(|t| (layout.w[s][t], -1.0)));
            lp.add_row(row, Relation::Eq, 0.0);
            lp.add_row(vec![(layout.z[s][i], 1.0), (r_s, 1.0)], Relation::Le, 1.0);
        }
    }

    for q in 0..n {
        let weight = inst.weight(q).raw() as f64 / scale;
        match layout.win[q] {
            WinVar::Never => {}
            WinVar::Own => {
                let i = layout.level_index(q, inst.query(q).cost);
                lp.set_objective(layout.z[q][i], weight);
                lp.set_objective(layout.r[q].unwrap(), weight);
            }
            WinVar::Y(y) => {
                lp.set_objective(y, weight);
                let price = inst.query(q).cost;
                let mut upper = vec![(y, 1.0)];
                for &s in inst.matchers(q) {
                    let zs = layout.z[s][layout.level_index(s, price)];
                    upper.push((zs, -1.0));
                    lp.add_row(vec![(y, 1.0), (zs, -1.0)], Relation::Ge, 0.0);
                }
                if let Some(r_q) = layout.r[q] {
                    upper.push((r_q, -1.0));
                    lp.add_row(vec![(y, 1.0), (r_q, -1.0)], Relation::Ge, 0.0);
                }
                lp.add_row(upper, Relation::Le, 0.0);
            }
        }
    }
    layout.lp = lp;
    layout
}

/// A fractional solution of the relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct KeywordFractional {
    pub levels: Vec<Vec<Money>>,
    /// `W[s][i]`, empty for non-biddable queries.
    pub w: Vec<Vec<f64>>,
    /// `Z[s][i]`, empty for non-biddable queries.
    pub z: Vec<Vec<f64>>,
    /// `R[s]`, 0 for non-biddable queries.
    pub r: Vec<f64>,
    /// Win mass of every query in the LP.
    pub y: Vec<f64>,
    /// `Σ y v n` in currency units.
    pub v_frac: f64,
    /// `Σ y c n` in currency units.
    pub c_frac: f64,
    /// LP objective in currency units.
    pub objective: f64,
}

impl KeywordFractional {
    /// Mass of broad bids on `s` at `price` or more.
    pub fn z_at(&self, s: usize, price: Money) -> f64 {
        self.levels[s]
            .iter()
            .zip(&self.w[s])
            .filter(|(p, _)| **p >= price)
            .map(|(_, w)| w)
            .sum()
    }

    pub fn is_keyword(&self, s: usize) -> bool {
        !self.levels[s].is_empty()
    }
}

/// Reads a solution vector back into named masses.
pub fn extract(inst: &Instance, layout: &KeywordLp, values: &[f64]) -> KeywordFractional {
    let n = inst.len();
    let clamp = |x: f64| x.clamp(0.0, 1.0);
    let pick = |idx: &Vec<usize>| idx.iter().map(|&i| clamp(values[i])).collect::<Vec<_>>();
    let w: Vec<Vec<f64>> = layout.w.iter().map(pick).collect();
    let z: Vec<Vec<f64>> = layout.z.iter().map(pick).collect();
    let r: Vec<f64> = layout
        .r
        .iter()
        .map(|r| r.map_or(0.0, |i| clamp(values[i])))
        .collect();
    let y: Vec<f64> = (0..n)
        .map(|q| match layout.win[q] {
            WinVar::Never => 0.0,
            WinVar::Own => {
                let i = layout.level_index(q, inst.query(q).cost);
                clamp(z[q][i] + r[q])
            }
            WinVar::Y(y) => clamp(values[y]),
        })
        .collect();
    let per_unit = |x: i128| x as f64 / WEIGHT_SCALE as f64;
    let v_frac: f64 = (0..n)
        .map(|q| y[q] * per_unit(inst.query(q).value_total().raw()))
        .sum();
    let c_frac: f64 = (0..n)
        .map(|q| y[q] * per_unit(inst.query(q).cost_total().raw()))
        .sum();
    KeywordFractional {
        levels: layout.levels.clone(),
        w,
        z,
        r,
        y,
        v_frac,
        c_frac,
        objective: layout.lp.objective_value(values) * layout.scale / WEIGHT_SCALE as f64,
    }
}

/// Solves an already-built relaxation.
pub fn solve_layout(
    inst: &Instance,
    layout: &KeywordLp,
) -> Result<KeywordFractional, KeywordError> {
    let sol = simplex::solve(&layout.lp)?;
    match sol.status {
        Status::Optimal => Ok(extract(inst, layout, &sol.values)),
        other => Err(KeywordError::LpStatus(other)),
    }
}

/// Optimal fractional solution of the relaxation.
pub fn solve_relaxation(inst: &Instance) -> Result<KeywordFractional, KeywordError> {
    solve_layout(inst, &build_ilp_approx(inst, true))
}
