//! Integer programming model of minimum-blocking-pair HRC.
//!
//! Variables (one-based in names):
//! - `x_i_p`: resident `i` holds position `p`; `p = l(i)+1` means unassigned.
//! - `th_i_p`: resident `i` blocks with position `p`. Fixed to 0 for the
//!   second member of each couple so couple pairs count once.
//! - `al_j_q`: forced to 1 unless hospital `j` is full with assignees
//!   ranked better than `q`.
//! - `be_j_q`: forced to 1 unless hospital `j` has at least `c_j - 1`
//!   assignees ranked better than `q`.
//!
//! Constraint families carry these tags:
//!
//! | tag   | meaning                                                     |
//! |-------|-------------------------------------------------------------|
//! | (4)   | `th` of second couple members is 0                          |
//! | (5)   | each resident holds exactly one position                    |
//! | (6)   | capacity                                                    |
//! | (7)   | couple members hold the same position                       |
//! | (8)   | single resident and hospital                                |
//! | (9)   | couple moves first member, second stays elsewhere           |
//! | (10)  | as (9) with both members at the same hospital               |
//! | (11)  | couple moves second member, first stays elsewhere           |
//! | (11s) | as (11) with both members at the same hospital              |
//! | (12)  | definition of `al`                                          |
//! | (13)  | definition of `be`                                          |
//! | (14)  | couple and two distinct hospitals                           |
//! | (15)  | couple and one hospital with free posts                     |
//! | (16)  | couple and one full hospital                                |
//! | (18)  | at most `k` blocking pairs                                  |
//!
//! Families (10), (11s), (13) and (15) are omitted for hospitals of
//! capacity one, where they are vacuous.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use crate::error::IpError;
use crate::model::{Agent, HospitalId, Instance, Matching, ResidentId};
use crate::stability::{blocking_pairs, Occupancy, StabilityMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X { r: usize, p: usize },
    Theta { r: usize, p: usize },
    Alpha { h: usize, q: usize },
    Beta { h: usize, q: usize },
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Var::X { r, p } => write!(f, "x_{}_{}", r + 1, p + 1),
            Var::Theta { r, p } => write!(f, "th_{}_{}", r + 1, p + 1),
            Var::Alpha { h, q } => write!(f, "al_{}_{}", h + 1, q + 1),
            Var::Beta { h, q } => write!(f, "be_{}_{}", h + 1, q + 1),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cmp {
    Le,
    Ge,
    Eq,
}

impl Cmp {
    fn symbol(self) -> &'static str {
        match self {
            Cmp::Le => "<=",
            Cmp::Ge => ">=",
            Cmp::Eq => "=",
        }
    }
}

/// `Σ coef · var  cmp  rhs`, terms sorted by variable index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub tag: &'static str,
    pub terms: Vec<(i64, usize)>,
    pub cmp: Cmp,
    pub rhs: i64,
}

impl Constraint {
    pub fn holds(&self, values: &[bool]) -> bool {
        let lhs: i64 = self.terms.iter().map(|&(c, v)| if values[v] { c } else { 0 }).sum();
        match self.cmp {
            Cmp::Le => lhs <= self.rhs,
            Cmp::Ge => lhs >= self.rhs,
            Cmp::Eq => lhs == self.rhs,
        }
    }
}

/// Linear expression under construction; repeated variables merge.
#[derive(Default)]
struct Expr(BTreeMap<usize, i64>);

impl Expr {
    fn add(mut self, coef: i64, vars: impl IntoIterator<Item = usize>) -> Self {
        for v in vars {
            *self.0.entry(v).or_insert(0) += coef;
        }
        self
    }

    fn finish(self, tag: &'static str, cmp: Cmp, rhs: i64) -> Constraint {
        let terms = self.0.into_iter().filter(|&(_, c)| c != 0).map(|(v, c)| (c, v)).collect();
        Constraint { tag, terms, cmp, rhs }
    }
}

/// Optimisation stage of an LP export.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// Minimise the number of blocking pairs.
    MinBp,
    /// Maximise size subject to at most `k` blocking pairs.
    MaxSize { k: usize },
}

#[derive(Clone, Debug)]
pub struct IpModel {
    vars: Vec<Var>,
    /// Per resident: x indices for positions `0..=l`.
    x: Vec<Vec<usize>>,
    theta: Vec<Vec<usize>>,
    alpha: Vec<Vec<usize>>,
    beta: Vec<Vec<usize>>,
    constraints: Vec<Constraint>,
    /// Odd members and singles only.
    bp_terms: Vec<usize>,
    size_terms: Vec<usize>,
}

struct Builder<'a> {
    inst: &'a Instance,
    model: IpModel,
}

impl Builder<'_> {
    fn var(&mut self, v: Var) -> usize {
        self.model.vars.push(v);
        self.model.vars.len() - 1
    }

    /// x variables of residents `h` ranks strictly better than `q`,
    /// skipping rank `skip`.
    fn better(&self, h: HospitalId, q: usize, skip: Option<usize>) -> Vec<usize> {
        (0..q)
            .filter(|&q2| Some(q2) != skip)
            .flat_map(|q2| self.inst.residents_at_rank(h, q2))
            .map(|(r, p)| self.model.x[r.0][p])
            .collect()
    }

    /// x variables of positions after `p` (worse or unassigned).
    fn worse(&self, r: ResidentId, p: usize) -> Vec<usize> {
        self.model.x[r.0][p + 1..].to_vec()
    }

    fn rank(&self, h: HospitalId, r: ResidentId) -> usize {
        self.inst.rank(h, r).expect("list entries are ranked")
    }

    fn push(&mut self, c: Constraint) {
        self.model.constraints.push(c);
    }
}

impl IpModel {
    pub fn build(inst: &Instance) -> Self {
        let n1 = inst.num_residents();
        let model = IpModel {
            vars: Vec::new(),
            x: Vec::with_capacity(n1),
            theta: Vec::with_capacity(n1),
            alpha: Vec::new(),
            beta: Vec::new(),
            constraints: Vec::new(),
            bp_terms: Vec::new(),
            size_terms: Vec::new(),
        };
        let mut b = Builder { inst, model };
        for r in 0..n1 {
            let l = inst.resident_list(ResidentId(r)).len();
            let xs = (0..=l).map(|p| b.var(Var::X { r, p })).collect();
            b.model.x.push(xs);
        }
        for r in 0..n1 {
            let l = inst.resident_list(ResidentId(r)).len();
            let ts = (0..l).map(|p| b.var(Var::Theta { r, p })).collect();
            b.model.theta.push(ts);
        }
        for h in 0..inst.num_hospitals() {
            let l = inst.hospitals()[h].prefs.len();
            let al = (0..l).map(|q| b.var(Var::Alpha { h, q })).collect();
            b.model.alpha.push(al);
        }
        for h in 0..inst.num_hospitals() {
            let l = inst.hospitals()[h].prefs.len();
            let be = (0..l).map(|q| b.var(Var::Beta { h, q })).collect();
            b.model.beta.push(be);
        }
        let second_member = |r: usize| r < 2 * inst.couples().len() && r % 2 == 1;
        for r in 0..n1 {
            let l = b.model.x[r].len() - 1;
            b.model.size_terms.extend_from_slice(&b.model.x[r][..l]);
            if !second_member(r) {
                b.model.bp_terms.extend_from_slice(&b.model.theta[r]);
            }
        }

        for r in 0..n1 {
            if second_member(r) {
                for &t in &b.model.theta[r].clone() {
                    let c = Expr::default().add(1, [t]).finish("(4)", Cmp::Eq, 0);
                    b.push(c);
                }
            }
        }
        for r in 0..n1 {
            let c = Expr::default().add(1, b.model.x[r].clone()).finish("(5)", Cmp::Eq, 1);
            b.push(c);
        }
        for h in 0..inst.num_hospitals() {
            let hid = HospitalId(h);
            let all = b.better(hid, inst.hospitals()[h].prefs.len(), None);
            let c = Expr::default().add(1, all).finish("(6)", Cmp::Le, inst.capacity(hid) as i64);
            b.push(c);
        }
        for i in 0..inst.couples().len() {
            let (r1, r2) = (2 * i, 2 * i + 1);
            for p in 0..b.model.x[r1].len() {
                let c = Expr::default().add(1, [b.model.x[r1][p]]).add(-1, [b.model.x[r2][p]]).finish(
                    "(7)",
                    Cmp::Eq,
                    0,
                );
                b.push(c);
            }
        }
        for s in 0..inst.singles().len() {
            let r = inst.single_resident(s);
            for (p, &h) in inst.resident_list(r).iter().enumerate() {
                let c = inst.capacity(h) as i64;
                let q = b.rank(h, r);
                let e = Expr::default()
                    .add(c, b.worse(r, p))
                    .add(-c, [b.model.theta[r.0][p]])
                    .add(-1, b.better(h, q, None));
                b.push(e.finish("(8)", Cmp::Le, 0));
            }
        }
        for i in 0..inst.couples().len() {
            couple_moves(&mut b, i);
        }
        for h in 0..inst.num_hospitals() {
            let hid = HospitalId(h);
            let c = inst.capacity(hid) as i64;
            for q in 0..inst.hospitals()[h].prefs.len() {
                let e = Expr::default().add(c, [b.model.alpha[h][q]]).add(1, b.better(hid, q, None));
                b.push(e.finish("(12)", Cmp::Ge, c));
            }
            if c >= 2 {
                for q in 0..inst.hospitals()[h].prefs.len() {
                    let e = Expr::default().add(c - 1, [b.model.beta[h][q]]).add(1, b.better(hid, q, None));
                    b.push(e.finish("(13)", Cmp::Ge, c - 1));
                }
            }
        }
        for i in 0..inst.couples().len() {
            couple_joint(&mut b, i);
        }
        b.model
    }

    pub fn vars(&self) -> &[Var] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn num_x(&self) -> usize {
        self.x.iter().map(Vec::len).sum()
    }

    pub fn num_theta(&self) -> usize {
        self.theta.iter().map(Vec::len).sum()
    }

    pub fn num_alpha(&self) -> usize {
        self.alpha.iter().map(Vec::len).sum()
    }

    pub fn num_beta(&self) -> usize {
        self.beta.iter().map(Vec::len).sum()
    }

    pub fn x(&self, r: ResidentId, p: usize) -> usize {
        self.x[r.0][p]
    }

    pub fn theta(&self, r: ResidentId, p: usize) -> usize {
        self.theta[r.0][p]
    }

    /// θ variables summed by the blocking-pair objective.
    pub fn bp_terms(&self) -> &[usize] {
        &self.bp_terms
    }

    /// x variables of assigned positions, summed by the size objective.
    pub fn size_terms(&self) -> &[usize] {
        &self.size_terms
    }

    /// The cap on blocking pairs.
    pub fn cap_constraint(&self, k: usize) -> Constraint {
        Expr::default().add(1, self.bp_terms.iter().copied()).finish("(18)", Cmp::Le, k as i64)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.to_string() == name)
    }
}

/// Builds the model for `inst`.
pub fn build_ip(inst: &Instance) -> IpModel {
    IpModel::build(inst)
}

/// Families (9)–(11s): one member changes hospital while the other keeps
/// its current one.
fn couple_moves(b: &mut Builder<'_>, i: usize) {
    let inst = b.inst;
    let (r1, r2) = inst.couple_residents(i);
    let pairs = &inst.couples()[i].pairs;
    for p1 in 0..pairs.len() {
        let (h1, h2) = pairs[p1];
        for p2 in p1 + 1..pairs.len() {
            // Which member keeps its hospital when moving from p2 to p1.
            let (mover, stayer, h) = if pairs[p2].1 == h2 {
                (r1, r2, h1)
            } else if pairs[p2].0 == h1 {
                (r2, r1, h2)
            } else {
                continue;
            };
            let c = inst.capacity(h) as i64;
            let x = b.model.x[r1.0][p2];
            let th = b.model.theta[r1.0][p1];
            let q = b.rank(h, mover);
            let (tag, coef, skip) = match (h1 == h2, mover == r1) {
                (false, true) => ("(9)", c, None),
                (false, false) => ("(11)", c, None),
                (true, _) if c < 2 => continue,
                (true, true) => ("(10)", c - 1, Some(b.rank(h, stayer))),
                (true, false) => ("(11s)", c - 1, Some(b.rank(h, stayer))),
            };
            let e = Expr::default().add(coef, [x]).add(-coef, [th]).add(-1, b.better(h, q, skip));
            b.push(e.finish(tag, Cmp::Le, 0));
        }
    }
}

/// Families (14)–(16): the couple moves to a pair from a worse position or
/// from being unassigned.
fn couple_joint(b: &mut Builder<'_>, i: usize) {
    let inst = b.inst;
    let (r1, r2) = inst.couple_residents(i);
    for (p, &(h1, h2)) in inst.couples()[i].pairs.iter().enumerate() {
        let worse = b.worse(r1, p);
        let th = b.model.theta[r1.0][p];
        let (q1, q2) = (b.rank(h1, r1), b.rank(h2, r2));
        if h1 != h2 {
            let e = Expr::default()
                .add(1, worse)
                .add(1, [b.model.alpha[h1.0][q1], b.model.alpha[h2.0][q2]])
                .add(-1, [th]);
            b.push(e.finish("(14)", Cmp::Le, 2));
            continue;
        }
        let h = h1;
        let c = inst.capacity(h) as i64;
        let (qmin, qmax) = (q1.min(q2), q1.max(q2));
        if c >= 2 {
            let all = b.better(h, inst.hospital(h).prefs.len(), None);
            let e = Expr::default()
                .add(c * (c - 1), worse.iter().copied())
                .add(-c * (c - 1), [th])
                .add(-1, b.better(h, qmin, None))
                .add(-(c - 1), all);
            b.push(e.finish("(15)", Cmp::Le, 0));
        }
        let e = Expr::default()
            .add(1, worse)
            .add(1, [b.model.alpha[h.0][qmax], b.model.beta[h.0][qmin]])
            .add(-1, [th]);
        b.push(e.finish("(16)", Cmp::Le, 2));
    }
}

fn write_expr(out: &mut String, model: &IpModel, terms: &[(i64, usize)]) {
    for (n, &(c, v)) in terms.iter().enumerate() {
        let sign = match (n, c < 0) {
            (0, false) => "",
            (0, true) => "-",
            (_, false) => " + ",
            (_, true) => " - ",
        };
        let mag = c.abs();
        if mag == 1 {
            let _ = write!(out, "{sign}{}", model.vars[v]);
        } else {
            let _ = write!(out, "{sign}{mag} {}", model.vars[v]);
        }
    }
}

/// The model as lp_solve LP text. Output is a pure function of the model.
pub fn export_lp(model: &IpModel, stage: Stage) -> String {
    let mut out = String::new();
    let (sense, terms) = match stage {
        Stage::MinBp => ("min", &model.bp_terms),
        Stage::MaxSize { .. } => ("max", &model.size_terms),
    };
    out.push_str("/* objective */\n");
    let _ = write!(out, "{sense}: ");
    let obj: Vec<(i64, usize)> = terms.iter().map(|&v| (1, v)).collect();
    write_expr(&mut out, model, &obj);
    out.push_str(";\n\n/* constraints */\n");
    let extra = match stage {
        Stage::MaxSize { k } => Some(model.cap_constraint(k)),
        Stage::MinBp => None,
    };
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for c in model.constraints.iter().chain(extra.as_ref()) {
        let n = counts.entry(c.tag).or_insert(0);
        *n += 1;
        let label = c.tag.trim_matches(|ch| ch == '(' || ch == ')');
        let _ = write!(out, "c{label}_{n}: ");
        if c.terms.is_empty() {
            out.push('0');
        } else {
            write_expr(&mut out, model, &c.terms);
        }
        let _ = writeln!(out, " {} {};", c.cmp.symbol(), c.rhs);
    }
    if !model.vars.is_empty() {
        out.push_str("\n/* binaries */\nbin ");
        let names: Vec<String> = model.vars.iter().map(ToString::to_string).collect();
        out.push_str(&names.join(", "));
        out.push_str(";\n");
    }
    out
}

/// A 0/1 value for every model variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IpAssignment {
    pub values: Vec<bool>,
}

impl IpAssignment {
    pub fn get(&self, v: usize) -> bool {
        self.values[v]
    }

    /// `name value` lines in model order.
    pub fn to_text(&self, model: &IpModel) -> String {
        model.vars.iter().zip(&self.values).map(|(v, &b)| format!("{v} {}\n", u8::from(b))).collect()
    }
}

/// Reads `name value` lines; `#` starts a comment.
pub fn parse_assignment(model: &IpModel, text: &str) -> Result<IpAssignment, IpError> {
    let index: HashMap<String, usize> =
        model.vars.iter().enumerate().map(|(i, v)| (v.to_string(), i)).collect();
    let mut values: Vec<Option<bool>> = vec![None; model.vars.len()];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let (Some(name), Some(val), None) = (it.next(), it.next(), it.next()) else {
            return Err(IpError::Parse { line: n + 1, message: "expected `name value`".into() });
        };
        let &i = index.get(name).ok_or_else(|| IpError::UnknownVariable(name.to_string()))?;
        values[i] = Some(match val {
            "0" => false,
            "1" => true,
            _ => return Err(IpError::NotBinary(name.to_string())),
        });
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| IpError::MissingVariable(model.vars[i].to_string())))
        .collect::<Result<_, _>>()?;
    Ok(IpAssignment { values })
}

/// Assignment induced by a matching: x from the positions, θ on the
/// blocking positions of singles and first couple members, α and β at their
/// forced values and 0 where free.
pub fn matching_to_assignment(
    inst: &Instance,
    m: &Matching,
    model: &IpModel,
) -> Result<IpAssignment, IpError> {
    m.check(inst)?;
    let mut values = vec![false; model.vars.len()];
    for r in 0..inst.num_residents() {
        let rid = ResidentId(r);
        let l = inst.resident_list(rid).len();
        let p = m.resident_position(inst, rid).unwrap_or(l);
        values[model.x[r][p]] = true;
    }
    for bp in blocking_pairs(inst, m, StabilityMode::Def1) {
        let r = match bp.agent {
            Agent::Single(s) => inst.single_resident(s),
            Agent::Couple(c) => inst.couple_residents(c).0,
        };
        values[model.theta[r.0][bp.position]] = true;
    }
    let occ = Occupancy::new(inst, m);
    for h in 0..inst.num_hospitals() {
        let hid = HospitalId(h);
        let c = inst.capacity(hid);
        for q in 0..inst.hospitals()[h].prefs.len() {
            let better = occ.better_than(hid, q);
            values[model.alpha[h][q]] = better < c;
            values[model.beta[h][q]] = c >= 2 && better + 1 < c;
        }
    }
    Ok(IpAssignment { values })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub feasible: bool,
    /// Indices into [`IpModel::constraints`].
    pub violated: Vec<usize>,
    pub theta_sum: usize,
    pub x_sum: usize,
}

impl VerifyReport {
    /// Distinct tags of violated constraints in model order.
    pub fn violated_tags(&self, model: &IpModel) -> Vec<&'static str> {
        let mut tags: Vec<&'static str> = Vec::new();
        for &i in &self.violated {
            let t = model.constraints[i].tag;
            if !tags.contains(&t) {
                tags.push(t);
            }
        }
        tags
    }
}

/// Evaluates every constraint of `model` on `a`.
pub fn verify_assignment(model: &IpModel, a: &IpAssignment) -> VerifyReport {
    let violated: Vec<usize> =
        model.constraints.iter().enumerate().filter(|(_, c)| !c.holds(&a.values)).map(|(i, _)| i).collect();
    VerifyReport {
        feasible: violated.is_empty(),
        violated,
        theta_sum: model.bp_terms.iter().filter(|&&v| a.values[v]).count(),
        x_sum: model.size_terms.iter().filter(|&&v| a.values[v]).count(),
    }
}

/// Matching read off the x values; checks assignment, capacity and couple
/// coherence first.
pub fn assignment_to_matching(
    inst: &Instance,
    model: &IpModel,
    a: &IpAssignment,
) -> Result<Matching, IpError> {
    for c in &model.constraints {
        if matches!(c.tag, "(5)" | "(6)" | "(7)") && !c.holds(&a.values) {
            return Err(IpError::Violated(c.tag));
        }
    }
    let pos = |r: usize| -> Option<usize> {
        let xs = &model.x[r];
        let p = xs.iter().position(|&v| a.values[v]).expect("checked by (5)");
        (p + 1 < xs.len()).then_some(p)
    };
    let mut m = Matching::empty(inst);
    for i in 0..inst.couples().len() {
        m.set(Agent::Couple(i), pos(2 * i));
    }
    for s in 0..inst.singles().len() {
        m.set(Agent::Single(s), pos(inst.single_resident(s).0));
    }
    Ok(m)
}
