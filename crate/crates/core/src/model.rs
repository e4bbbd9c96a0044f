//! Instances, matchings, their text formats and validation.
//!
//! Residents and hospitals are addressed by zero-based newtype ids. The text
//! formats use one-based ids. Couples occupy resident ids `2i, 2i+1` (one-based
//! `2i+1, 2i+2`) and singles follow them.

use std::collections::HashSet;
use std::fmt;

use crate::error::{ModelError, Severity, Violation};

/// Zero-based resident index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ResidentId(pub usize);

/// Zero-based hospital index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HospitalId(pub usize);

impl fmt::Display for ResidentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0 + 1)
    }
}

impl fmt::Display for HospitalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "h{}", self.0 + 1)
    }
}

/// A matching unit: a single resident or a couple acting jointly.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Agent {
    /// Index into [`Instance::singles`].
    Single(usize),
    /// Index into [`Instance::couples`].
    Couple(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hospital {
    pub capacity: usize,
    pub prefs: Vec<ResidentId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Single {
    pub prefs: Vec<HospitalId>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Couple {
    pub pairs: Vec<(HospitalId, HospitalId)>,
}

const UNRANKED: u32 = u32::MAX;

/// An HRC instance with derived lookup tables.
#[derive(Clone, Debug)]
pub struct Instance {
    hospitals: Vec<Hospital>,
    couples: Vec<Couple>,
    singles: Vec<Single>,
    /// `rank[h * n_residents + r]`, zero-based, `UNRANKED` if absent.
    rank: Vec<u32>,
    /// Projected per-resident lists (couple members repeat hospitals).
    projected: Vec<Vec<HospitalId>>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.hospitals == other.hospitals && self.couples == other.couples && self.singles == other.singles
    }
}

impl Eq for Instance {}

impl Instance {
    /// Builds an instance after checking that every id is in range.
    /// Semantic checks live in [`Instance::validate`].
    pub fn new(
        hospitals: Vec<Hospital>,
        couples: Vec<Couple>,
        singles: Vec<Single>,
    ) -> Result<Self, ModelError> {
        let n1 = 2 * couples.len() + singles.len();
        let n2 = hospitals.len();
        for (j, h) in hospitals.iter().enumerate() {
            if let Some(r) = h.prefs.iter().find(|r| r.0 >= n1) {
                return Err(ModelError::UnknownResident(format!("{} listed by h{}", r.0 + 1, j + 1)));
            }
        }
        let check_h = |h: HospitalId, who: String| {
            if h.0 >= n2 {
                Err(ModelError::UnknownHospital(format!("{} listed by {}", h.0 + 1, who)))
            } else {
                Ok(())
            }
        };
        for (i, c) in couples.iter().enumerate() {
            for &(a, b) in &c.pairs {
                check_h(a, format!("couple {}", i + 1))?;
                check_h(b, format!("couple {}", i + 1))?;
            }
        }
        for (i, s) in singles.iter().enumerate() {
            for &h in &s.prefs {
                check_h(h, format!("r{}", 2 * couples.len() + i + 1))?;
            }
        }

        let mut rank = vec![UNRANKED; n1 * n2];
        for (j, h) in hospitals.iter().enumerate() {
            for (q, r) in h.prefs.iter().enumerate() {
                let slot = &mut rank[j * n1 + r.0];
                if *slot == UNRANKED {
                    *slot = q as u32;
                }
            }
        }
        let mut projected = Vec::with_capacity(n1);
        for c in &couples {
            projected.push(c.pairs.iter().map(|p| p.0).collect());
            projected.push(c.pairs.iter().map(|p| p.1).collect());
        }
        for s in &singles {
            projected.push(s.prefs.clone());
        }
        Ok(Instance { hospitals, couples, singles, rank, projected })
    }

    pub fn hospitals(&self) -> &[Hospital] {
        &self.hospitals
    }

    pub fn couples(&self) -> &[Couple] {
        &self.couples
    }

    pub fn singles(&self) -> &[Single] {
        &self.singles
    }

    pub fn num_residents(&self) -> usize {
        2 * self.couples.len() + self.singles.len()
    }

    pub fn num_hospitals(&self) -> usize {
        self.hospitals.len()
    }

    pub fn hospital(&self, h: HospitalId) -> &Hospital {
        &self.hospitals[h.0]
    }

    pub fn capacity(&self, h: HospitalId) -> usize {
        self.hospitals[h.0].capacity
    }

    pub fn total_posts(&self) -> usize {
        self.hospitals.iter().map(|h| h.capacity).sum()
    }

    /// Zero-based rank of `r` on `h`'s list.
    pub fn rank(&self, h: HospitalId, r: ResidentId) -> Option<usize> {
        let v = self.rank[h.0 * self.num_residents() + r.0];
        (v != UNRANKED).then_some(v as usize)
    }

    /// The resident's own list, with couple members projected positionwise.
    pub fn resident_list(&self, r: ResidentId) -> &[HospitalId] {
        &self.projected[r.0]
    }

    /// Hospital of `r` at zero-based position `p`.
    pub fn pref(&self, r: ResidentId, p: usize) -> HospitalId {
        self.projected[r.0][p]
    }

    pub fn agent_of(&self, r: ResidentId) -> Agent {
        let nc = self.couples.len();
        if r.0 < 2 * nc {
            Agent::Couple(r.0 / 2)
        } else {
            Agent::Single(r.0 - 2 * nc)
        }
    }

    pub fn partner(&self, r: ResidentId) -> Option<ResidentId> {
        match self.agent_of(r) {
            Agent::Couple(_) => Some(ResidentId(r.0 ^ 1)),
            Agent::Single(_) => None,
        }
    }

    pub fn single_resident(&self, i: usize) -> ResidentId {
        ResidentId(2 * self.couples.len() + i)
    }

    pub fn couple_residents(&self, i: usize) -> (ResidentId, ResidentId) {
        (ResidentId(2 * i), ResidentId(2 * i + 1))
    }

    /// All agents, couples first, in id order.
    pub fn agents(&self) -> impl Iterator<Item = Agent> + '_ {
        (0..self.couples.len()).map(Agent::Couple).chain((0..self.singles.len()).map(Agent::Single))
    }

    pub fn num_agents(&self) -> usize {
        self.couples.len() + self.singles.len()
    }

    pub fn agent_list_len(&self, a: Agent) -> usize {
        match a {
            Agent::Single(i) => self.singles[i].prefs.len(),
            Agent::Couple(i) => self.couples[i].pairs.len(),
        }
    }

    /// The resident `h` ranks at `q` (zero-based) paired with every position
    /// where `h` appears on that resident's (projected) list.
    pub fn residents_at_rank(&self, h: HospitalId, q: usize) -> Vec<(ResidentId, usize)> {
        let Some(&r) = self.hospitals[h.0].prefs.get(q) else {
            return Vec::new();
        };
        self.projected[r.0].iter().enumerate().filter(|(_, &x)| x == h).map(|(p, _)| (r, p)).collect()
    }

    pub fn agent_residents(&self, a: Agent) -> Vec<ResidentId> {
        match a {
            Agent::Single(i) => vec![self.single_resident(i)],
            Agent::Couple(i) => {
                let (x, y) = self.couple_residents(i);
                vec![x, y]
            }
        }
    }

    /// Hospitals taken by the agent's members at position `p`.
    pub fn agent_placement(&self, a: Agent, p: usize) -> Placement {
        match a {
            Agent::Single(i) => Placement::One((self.single_resident(i), self.singles[i].prefs[p])),
            Agent::Couple(i) => {
                let (x, y) = self.couple_residents(i);
                let (hx, hy) = self.couples[i].pairs[p];
                Placement::Two((x, hx), (y, hy))
            }
        }
    }

    /// Max single list length (alpha), max couple list length (beta) and max
    /// hospital list length (gamma).
    pub fn profile(&self) -> (usize, usize, usize) {
        let a = self.singles.iter().map(|s| s.prefs.len()).max().unwrap_or(0);
        let b = self.couples.iter().map(|c| c.pairs.len()).max().unwrap_or(0);
        let g = self.hospitals.iter().map(|h| h.prefs.len()).max().unwrap_or(0);
        (a, b, g)
    }

    /// Semantic checks. Errors make an instance unusable; warnings do not.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let err = |msg: String| Violation { severity: Severity::Error, message: msg };
        for (j, h) in self.hospitals.iter().enumerate() {
            let hid = HospitalId(j);
            if h.capacity == 0 {
                out.push(err(format!("{hid} has capacity 0")));
            }
            let mut seen = HashSet::new();
            for &r in &h.prefs {
                if !seen.insert(r) {
                    out.push(err(format!("{hid} lists {r} twice")));
                } else if !self.resident_list(r).contains(&hid) {
                    out.push(err(format!("{hid} lists {r} but {r} does not list {hid}")));
                }
            }
            if h.prefs.is_empty() {
                out.push(Violation {
                    severity: Severity::Warning,
                    message: format!("{hid} has an empty list"),
                });
            }
        }
        for (i, c) in self.couples.iter().enumerate() {
            if c.pairs.is_empty() {
                out.push(err(format!("couple {} has an empty list", i + 1)));
            }
            let mut seen = HashSet::new();
            for &pair in &c.pairs {
                if !seen.insert(pair) {
                    out.push(err(format!("couple {} lists ({},{}) twice", i + 1, pair.0, pair.1)));
                }
            }
        }
        for (i, s) in self.singles.iter().enumerate() {
            let r = self.single_resident(i);
            let mut seen = HashSet::new();
            for &h in &s.prefs {
                if !seen.insert(h) {
                    out.push(err(format!("{r} lists {h} twice")));
                }
            }
            if s.prefs.is_empty() {
                out.push(Violation {
                    severity: Severity::Warning,
                    message: format!("{r} has an empty list"),
                });
            }
        }
        for r in (0..self.num_residents()).map(ResidentId) {
            for &h in self.resident_list(r) {
                if self.rank(h, r).is_none() {
                    out.push(err(format!("{r} lists {h} but {h} does not rank {r}")));
                }
            }
        }
        out.dedup();
        out
    }

    /// Builds and validates, rejecting instances with error-level violations.
    pub fn new_validated(
        hospitals: Vec<Hospital>,
        couples: Vec<Couple>,
        singles: Vec<Single>,
    ) -> Result<Self, ModelError> {
        let inst = Self::new(hospitals, couples, singles)?;
        let errors: Vec<_> = inst.validate().into_iter().filter(|v| v.severity == Severity::Error).collect();
        if errors.is_empty() {
            Ok(inst)
        } else {
            Err(ModelError::Invalid(errors))
        }
    }
}

/// Where an agent's members sit for a given list position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    One((ResidentId, HospitalId)),
    Two((ResidentId, HospitalId), (ResidentId, HospitalId)),
}

impl Placement {
    pub fn iter(self) -> impl Iterator<Item = (ResidentId, HospitalId)> {
        let (a, b) = match self {
            Placement::One(x) => (x, None),
            Placement::Two(x, y) => (x, Some(y)),
        };
        std::iter::once(a).chain(b)
    }
}

/// A matching stored per agent: `Some(p)` is a zero-based list position.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    pub couples: Vec<Option<usize>>,
    pub singles: Vec<Option<usize>>,
}

impl Matching {
    pub fn empty(inst: &Instance) -> Self {
        Matching { couples: vec![None; inst.couples().len()], singles: vec![None; inst.singles().len()] }
    }

    pub fn position(&self, a: Agent) -> Option<usize> {
        match a {
            Agent::Single(i) => self.singles[i],
            Agent::Couple(i) => self.couples[i],
        }
    }

    pub fn set(&mut self, a: Agent, p: Option<usize>) {
        match a {
            Agent::Single(i) => self.singles[i] = p,
            Agent::Couple(i) => self.couples[i] = p,
        }
    }

    /// Zero-based position of a resident (shared by couple members).
    pub fn resident_position(&self, inst: &Instance, r: ResidentId) -> Option<usize> {
        self.position(inst.agent_of(r))
    }

    pub fn hospital_of(&self, inst: &Instance, r: ResidentId) -> Option<HospitalId> {
        self.resident_position(inst, r).map(|p| inst.pref(r, p))
    }

    /// Number of assigned residents.
    pub fn size(&self) -> usize {
        2 * self.couples.iter().flatten().count() + self.singles.iter().flatten().count()
    }

    /// Assignees of each hospital, in resident id order.
    pub fn assignees(&self, inst: &Instance) -> Vec<Vec<ResidentId>> {
        let mut out = vec![Vec::new(); inst.num_hospitals()];
        for r in (0..inst.num_residents()).map(ResidentId) {
            if let Some(h) = self.hospital_of(inst, r) {
                out[h.0].push(r);
            }
        }
        out
    }

    /// Checks positions are in range and capacities hold.
    pub fn check(&self, inst: &Instance) -> Result<(), ModelError> {
        if self.couples.len() != inst.couples().len() || self.singles.len() != inst.singles().len() {
            return Err(ModelError::MatchingShape);
        }
        for a in inst.agents() {
            if let Some(p) = self.position(a) {
                if p >= inst.agent_list_len(a) {
                    return Err(ModelError::MatchingShape);
                }
            }
        }
        for (j, list) in self.assignees(inst).iter().enumerate() {
            if list.len() > inst.hospitals()[j].capacity {
                return Err(ModelError::CapacityExceeded(HospitalId(j).to_string()));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Text formats

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> ModelError {
    ModelError::Parse { line, message: msg.into() }
}

fn parse_id(tok: &str, line: usize, what: &str) -> Result<usize, ModelError> {
    match tok.parse::<usize>() {
        Ok(v) if v >= 1 => Ok(v - 1),
        _ => Err(parse_err(line, format!("bad {what} id '{tok}'"))),
    }
}

/// Splits `head : tail` into its two token lists.
fn split_colon(rest: &str, line: usize) -> Result<(Vec<&str>, Vec<&str>), ModelError> {
    let (a, b) = rest.split_once(':').ok_or_else(|| parse_err(line, "expected ':'"))?;
    Ok((a.split_whitespace().collect(), b.split_whitespace().collect()))
}

/// Parses the instance text format and validates the result.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, "hrc 1")) => {}
        Some((n, _)) => return Err(parse_err(n, "expected header 'hrc 1'")),
        None => return Err(parse_err(0, "empty input")),
    }

    let mut counts = [None::<usize>; 3];
    let mut hospitals: Vec<Option<usize>> = Vec::new();
    let mut hosp_prefs: Vec<Option<Vec<ResidentId>>> = Vec::new();
    let mut singles: Vec<Option<Single>> = Vec::new();
    let mut couples: Vec<Option<Couple>> = Vec::new();

    for (n, line) in lines {
        let (kw, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        let rest = rest.trim();
        match kw {
            "singles" | "couples" | "hospitals" => {
                let k = ["singles", "couples", "hospitals"].iter().position(|s| *s == kw).unwrap();
                if counts[k].is_some() {
                    return Err(parse_err(n, format!("duplicate '{kw}' line")));
                }
                let v = rest.parse::<usize>().map_err(|_| parse_err(n, format!("bad count '{rest}'")))?;
                counts[k] = Some(v);
                match k {
                    0 => singles = vec![None; v],
                    1 => couples = vec![None; v],
                    _ => {
                        hospitals = vec![None; v];
                        hosp_prefs = vec![None; v];
                    }
                }
            }
            _ if counts.iter().any(Option::is_none) => {
                return Err(parse_err(n, "counts must precede records"));
            }
            "hospital" => {
                let toks: Vec<_> = rest.split_whitespace().collect();
                if toks.len() != 2 {
                    return Err(parse_err(n, "expected 'hospital <hid> <cap>'"));
                }
                let h = parse_id(toks[0], n, "hospital")?;
                let cap = toks[1]
                    .parse::<usize>()
                    .map_err(|_| parse_err(n, format!("bad capacity '{}'", toks[1])))?;
                let slot = hospitals
                    .get_mut(h)
                    .ok_or_else(|| parse_err(n, format!("hospital id {} out of range", h + 1)))?;
                if slot.replace(cap).is_some() {
                    return Err(parse_err(n, format!("duplicate hospital {}", h + 1)));
                }
            }
            "pref" => {
                let (head, tail) = split_colon(rest, n)?;
                if head.len() != 1 {
                    return Err(parse_err(n, "expected 'pref <hid> : <rid>...'"));
                }
                let h = parse_id(head[0], n, "hospital")?;
                let prefs = tail
                    .iter()
                    .map(|t| parse_id(t, n, "resident").map(ResidentId))
                    .collect::<Result<Vec<_>, _>>()?;
                let slot = hosp_prefs
                    .get_mut(h)
                    .ok_or_else(|| parse_err(n, format!("hospital id {} out of range", h + 1)))?;
                if slot.replace(prefs).is_some() {
                    return Err(parse_err(n, format!("duplicate pref line for hospital {}", h + 1)));
                }
            }
            "single" => {
                let (head, tail) = split_colon(rest, n)?;
                if head.len() != 1 {
                    return Err(parse_err(n, "expected 'single <rid> : <hid>...'"));
                }
                let r = parse_id(head[0], n, "resident")?;
                let base = 2 * couples.len();
                if r < base || r >= base + singles.len() {
                    return Err(parse_err(
                        n,
                        format!("single id {} outside {}..={}", r + 1, base + 1, base + singles.len()),
                    ));
                }
                let prefs = tail
                    .iter()
                    .map(|t| parse_id(t, n, "hospital").map(HospitalId))
                    .collect::<Result<Vec<_>, _>>()?;
                if singles[r - base].replace(Single { prefs }).is_some() {
                    return Err(parse_err(n, format!("duplicate single {}", r + 1)));
                }
            }
            "couple" => {
                let (head, tail) = split_colon(rest, n)?;
                if head.len() != 2 {
                    return Err(parse_err(n, "expected 'couple <ridA> <ridB> : h,h ...'"));
                }
                let a = parse_id(head[0], n, "resident")?;
                let b = parse_id(head[1], n, "resident")?;
                if a % 2 != 0 || b != a + 1 || a / 2 >= couples.len() {
                    return Err(parse_err(
                        n,
                        format!("couple ids must be an (odd, even) pair within 1..={}", 2 * couples.len()),
                    ));
                }
                let pairs = tail
                    .iter()
                    .map(|t| {
                        let (x, y) =
                            t.split_once(',').ok_or_else(|| parse_err(n, format!("bad pair '{t}'")))?;
                        Ok((HospitalId(parse_id(x, n, "hospital")?), HospitalId(parse_id(y, n, "hospital")?)))
                    })
                    .collect::<Result<Vec<_>, ModelError>>()?;
                if couples[a / 2].replace(Couple { pairs }).is_some() {
                    return Err(parse_err(n, format!("duplicate couple {} {}", a + 1, b + 1)));
                }
            }
            other => return Err(parse_err(n, format!("unknown record '{other}'"))),
        }
    }

    if counts.iter().any(Option::is_none) {
        return Err(parse_err(0, "missing singles/couples/hospitals count"));
    }
    let hospitals = hospitals
        .into_iter()
        .zip(hosp_prefs)
        .enumerate()
        .map(|(j, (cap, prefs))| {
            let capacity = cap.ok_or_else(|| parse_err(0, format!("missing hospital line for {}", j + 1)))?;
            Ok(Hospital { capacity, prefs: prefs.unwrap_or_default() })
        })
        .collect::<Result<Vec<_>, ModelError>>()?;
    let nc = couples.len();
    let couples = couples
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| parse_err(0, format!("missing couple {} {}", 2 * i + 1, 2 * i + 2))))
        .collect::<Result<Vec<_>, _>>()?;
    let singles = singles
        .into_iter()
        .enumerate()
        .map(|(i, s)| s.ok_or_else(|| parse_err(0, format!("missing single {}", 2 * nc + i + 1))))
        .collect::<Result<Vec<_>, _>>()?;
    Instance::new_validated(hospitals, couples, singles)
}

/// Canonical text form; `parse_instance(&serialize_instance(x)) == x`.
pub fn serialize_instance(inst: &Instance) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
    writeln!(s, "hrc 1").unwrap();
    writeln!(s, "singles {}", inst.singles().len()).unwrap();
    writeln!(s, "couples {}", inst.couples().len()).unwrap();
    writeln!(s, "hospitals {}", inst.num_hospitals()).unwrap();
    for (j, h) in inst.hospitals().iter().enumerate() {
        writeln!(s, "hospital {} {}", j + 1, h.capacity).unwrap();
    }
    for (i, sg) in inst.singles().iter().enumerate() {
        let r = inst.single_resident(i);
        let list = join(&mut sg.prefs.iter().map(|h| (h.0 + 1).to_string()));
        writeln!(s, "single {} : {}", r.0 + 1, list).unwrap();
    }
    for (i, c) in inst.couples().iter().enumerate() {
        let list = join(&mut c.pairs.iter().map(|(a, b)| format!("{},{}", a.0 + 1, b.0 + 1)));
        writeln!(s, "couple {} {} : {}", 2 * i + 1, 2 * i + 2, list).unwrap();
    }
    for (j, h) in inst.hospitals().iter().enumerate() {
        let list = join(&mut h.prefs.iter().map(|r| (r.0 + 1).to_string()));
        writeln!(s, "pref {} : {}", j + 1, list).unwrap();
    }
    // Trim the trailing blank after ':' on empty lists.
    s.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_instance(self))
    }
}

/// Parses `assign <rid> <hid|->` lines against an instance.
pub fn parse_matching(inst: &Instance, text: &str) -> Result<Matching, ModelError> {
    let n1 = inst.num_residents();
    let mut hosp: Vec<Option<Option<HospitalId>>> = vec![None; n1];
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<_> = line.split_whitespace().collect();
        if toks.len() != 3 || toks[0] != "assign" {
            return Err(parse_err(n, "expected 'assign <rid> <hid|->'"));
        }
        let r = parse_id(toks[1], n, "resident")?;
        if r >= n1 {
            return Err(ModelError::UnknownResident((r + 1).to_string()));
        }
        let h = if toks[2] == "-" {
            None
        } else {
            let h = parse_id(toks[2], n, "hospital")?;
            if h >= inst.num_hospitals() {
                return Err(ModelError::UnknownHospital((h + 1).to_string()));
            }
            Some(HospitalId(h))
        };
        if hosp[r].replace(h).is_some() {
            return Err(parse_err(n, format!("resident {} assigned twice", r + 1)));
        }
    }
    let hosp: Vec<Option<HospitalId>> = hosp
        .into_iter()
        .enumerate()
        .map(|(r, h)| h.ok_or_else(|| ModelError::MissingResident(format!("r{}", r + 1))))
        .collect::<Result<_, _>>()?;

    let mut m = Matching::empty(inst);
    for (i, s) in inst.singles().iter().enumerate() {
        let r = inst.single_resident(i);
        if let Some(h) = hosp[r.0] {
            let p = s
                .prefs
                .iter()
                .position(|&x| x == h)
                .ok_or_else(|| ModelError::Unacceptable(format!("{r} -> {h}")))?;
            m.singles[i] = Some(p);
        }
    }
    for (i, c) in inst.couples().iter().enumerate() {
        let (x, y) = inst.couple_residents(i);
        for r in [x, y] {
            if let Some(h) = hosp[r.0] {
                if !inst.resident_list(r).contains(&h) {
                    return Err(ModelError::Unacceptable(format!("{r} -> {h}")));
                }
            }
        }
        m.couples[i] = match (hosp[x.0], hosp[y.0]) {
            (None, None) => None,
            (Some(a), Some(b)) => Some(
                c.pairs
                    .iter()
                    .position(|&pr| pr == (a, b))
                    .ok_or_else(|| ModelError::CoupleInconsistency(format!("couple {}", i + 1)))?,
            ),
            _ => return Err(ModelError::CoupleInconsistency(format!("couple {}", i + 1))),
        };
    }
    m.check(inst)?;
    Ok(m)
}

/// One `assign` line per resident in id order.
pub fn serialize_matching(inst: &Instance, m: &Matching) -> String {
    let mut s = String::new();
    for r in (0..inst.num_residents()).map(ResidentId) {
        match m.hospital_of(inst, r) {
            Some(h) => s.push_str(&format!("assign {} {}\n", r.0 + 1, h.0 + 1)),
            None => s.push_str(&format!("assign {} -\n", r.0 + 1)),
        }
    }
    s
}
