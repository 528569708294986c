use std::collections::{BTreeMap, BTreeSet, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use super::LambdaSet;
use crate::error::{Error, Result};
use crate::resonance::{Mode, Quartet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Property {
    /// (P1′) closure under (p,q)-parallelogram completion.
    Closure,
    /// (P2) unique spouse and children.
    SpouseChildren,
    /// (P3) unique parents and sibling.
    ParentsSibling,
    /// (P4) sibling ≠ spouse.
    NonDegeneracy,
    /// (P5′) no (p,q)-parallelograms besides families.
    Faithfulness,
    /// (P6) every linear relation is trivial or a family.
    LinearRelations,
    /// Stored relation maps agree with the geometric families.
    Relations,
}

impl Property {
    pub const ALL: [Property; 7] = [
        Property::Closure,
        Property::SpouseChildren,
        Property::ParentsSibling,
        Property::NonDegeneracy,
        Property::Faithfulness,
        Property::LinearRelations,
        Property::Relations,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Property::Closure => "P1'",
            Property::SpouseChildren => "P2",
            Property::ParentsSibling => "P3",
            Property::NonDegeneracy => "P4",
            Property::Faithfulness => "P5'",
            Property::LinearRelations => "P6",
            Property::Relations => "relations",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Witness {
    Quartet(Quartet),
    Mode(Mode),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub property: Property,
    pub pass: bool,
    /// The first few counterexamples in sorted order.
    pub counterexamples: Vec<Witness>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropertyReport {
    pub checks: Vec<PropertyCheck>,
    pub modes: usize,
    /// Size of the exhaustive search space that was scanned.
    pub scanned: u128,
    pub scanner: &'static str,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, p: Property) -> &PropertyCheck {
        self.checks.iter().find(|c| c.property == p).expect("every property is checked")
    }

    pub fn failing(&self) -> Vec<Property> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.property).collect()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Maximum number of ordered tuples a scanner may visit.
    pub budget: u128,
    pub max_witnesses: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            budget: 20_000_000,
            max_witnesses: 8,
        }
    }
}

fn cross(u: Mode, v: Mode) -> i128 {
    u.j as i128 * v.k as i128 - u.k as i128 * v.j as i128
}

/// q²·Ω_{p/q}, an integer.
fn omega_pq_scaled(quartet: &Quartet, p: i64, q: i64) -> i128 {
    let (sj, sk) = quartet.alternating_sums();
    (q as i128).pow(2) * sj + (p as i128).pow(2) * sk
}

#[derive(Default)]
struct Findings {
    hits: BTreeMap<Property, BTreeSet<Witness>>,
    families: BTreeSet<Quartet>,
}

impl Findings {
    fn add(&mut self, p: Property, w: Witness) {
        self.hits.entry(p).or_default().insert(w);
    }

    fn merge(mut self, other: Findings) -> Findings {
        for (p, ws) in other.hits {
            self.hits.entry(p).or_default().extend(ws);
        }
        self.families.extend(other.families);
        self
    }
}

/// Canonical nuclear family with the older generation in odd slots.
fn oriented(q: &Quartet, gen: &dyn Fn(&Mode) -> Option<usize>) -> Option<Quartet> {
    let [a, b, c, d] = q.0;
    let (ga, gb, gc, gd) = (gen(&a)?, gen(&b)?, gen(&c)?, gen(&d)?);
    if ga == gc && gb == gd && gb == ga + 1 {
        Some(q.canonical())
    } else if ga == gc && gb == gd && ga == gb + 1 {
        Some(Quartet::new(b, a, d, c).canonical())
    } else {
        None
    }
}

fn finish(set: &LambdaSet, mut f: Findings, opts: &VerifyOptions, scanned: u128, scanner: &'static str) -> PropertyReport {
    let n = set.n_generations();
    // (P2) and (P3) from the geometric families
    let mut as_parent: BTreeMap<Mode, BTreeSet<Quartet>> = BTreeMap::new();
    let mut as_child: BTreeMap<Mode, BTreeSet<Quartet>> = BTreeMap::new();
    for fam in &f.families {
        let [a, b, c, d] = fam.0;
        for x in [a, c] {
            as_parent.entry(x).or_default().insert(*fam);
        }
        for x in [b, d] {
            as_child.entry(x).or_default().insert(*fam);
        }
    }
    for (i, g) in set.generations().iter().enumerate() {
        for m in g {
            if i + 1 < n && as_parent.get(m).map_or(0, |s| s.len()) != 1 {
                f.add(Property::SpouseChildren, Witness::Mode(*m));
            }
            if i > 0 && as_child.get(m).map_or(0, |s| s.len()) != 1 {
                f.add(Property::ParentsSibling, Witness::Mode(*m));
            }
        }
    }
    // (P4)
    for (m, fams) in &as_parent {
        let (Some(up), Some(down)) = (fams.iter().next(), as_child.get(m).and_then(|s| s.iter().next())) else {
            continue;
        };
        let spouse = if up.0[0] == *m { up.0[2] } else { up.0[0] };
        let sibling = if down.0[1] == *m { down.0[3] } else { down.0[1] };
        if spouse == sibling {
            f.add(Property::NonDegeneracy, Witness::Mode(*m));
        }
    }
    // stored relations
    let stored: BTreeSet<Quartet> = set.families().into_iter().flatten().map(|q| q.canonical()).collect();
    let mismatched: Vec<Quartet> = stored.symmetric_difference(&f.families).copied().collect();
    for q in mismatched {
        f.add(Property::Relations, Witness::Quartet(q));
    }
    let checks = Property::ALL
        .iter()
        .map(|p| {
            let ws: Vec<Witness> = f
                .hits
                .get(p)
                .map(|s| s.iter().take(opts.max_witnesses).copied().collect())
                .unwrap_or_default();
            PropertyCheck {
                property: *p,
                pass: ws.is_empty(),
                counterexamples: ws,
            }
        })
        .collect();
    PropertyReport {
        checks,
        modes: set.len(),
        scanned,
        scanner,
    }
}

/// Checks (P1′), (P2)–(P4), (P5′), (P6) by scanning every ordered triple
/// and solving for the fourth vertex.
pub fn verify_properties(set: &LambdaSet, opts: &VerifyOptions) -> Result<PropertyReport> {
    let modes = set.modes();
    let m = modes.len() as u128;
    let needed = m * m * m;
    if needed > opts.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let (p, q) = set.scaling();
    let gen = |x: &Mode| set.generation_of(x);
    let findings = modes
        .par_iter()
        .map(|&n1| {
            let mut f = Findings::default();
            for &n2 in &modes {
                for &n3 in &modes {
                    let n4 = n1 - n2 + n3;
                    let quartet = Quartet::new(n1, n2, n3, n4);
                    let trivial = n2 == n1 || n2 == n3;
                    let nondegenerate = cross(n1 - n2, n3 - n2) != 0;
                    let resonant = omega_pq_scaled(&quartet, p, q) == 0;
                    let inside = set.contains(&n4);
                    if nondegenerate && resonant && !inside {
                        f.add(Property::Closure, Witness::Quartet(quartet.canonical()));
                    }
                    if !inside || trivial {
                        continue;
                    }
                    let family = if nondegenerate && resonant {
                        oriented(&quartet, &gen)
                    } else {
                        None
                    };
                    match family {
                        Some(fam) => {
                            f.families.insert(fam);
                        }
                        None => {
                            if nondegenerate && resonant {
                                f.add(Property::Faithfulness, Witness::Quartet(quartet.canonical()));
                            }
                            f.add(Property::LinearRelations, Witness::Quartet(quartet.canonical()));
                        }
                    }
                }
            }
            f
        })
        .reduce(Findings::default, Findings::merge);
    Ok(finish(set, findings, opts, needed, "triples"))
}

/// Independent scanner over all ordered quadruples of Λ⁴, plus ordered
/// triples for closure. Quadratically slower; used as an oracle.
pub fn verify_properties_exhaustive(set: &LambdaSet, opts: &VerifyOptions) -> Result<PropertyReport> {
    let modes = set.modes();
    let m = modes.len() as u128;
    let needed = m.pow(4) + m.pow(3);
    if needed > opts.budget {
        return Err(Error::BudgetExceeded {
            needed,
            budget: opts.budget,
        });
    }
    let (p, q) = set.scaling();
    let member: HashSet<Mode> = modes.iter().copied().collect();
    let gen_idx: Vec<usize> = modes.iter().map(|x| set.generation_of(x).expect("member")).collect();
    let pq_zero = |qt: &Quartet| {
        let [a, b, c, d] = qt.0;
        let jsum = a.j * a.j - b.j * b.j + c.j * c.j - d.j * d.j;
        let ksum = a.k * a.k - b.k * b.k + c.k * c.k - d.k * d.k;
        q as i128 * q as i128 * jsum as i128 + p as i128 * p as i128 * ksum as i128 == 0
    };
    // parallelogram with diagonals n1n3 and n2n4 has zero area iff all four are collinear
    let flat = |qt: &Quartet| {
        let [a, b, c, _] = qt.0;
        (b.j - a.j) as i128 * (c.k - a.k) as i128 == (b.k - a.k) as i128 * (c.j - a.j) as i128
    };
    let findings = (0..modes.len())
        .into_par_iter()
        .map(|i1| {
            let mut f = Findings::default();
            for i2 in 0..modes.len() {
                for i3 in 0..modes.len() {
                    let (a, b, c) = (modes[i1], modes[i2], modes[i3]);
                    let fourth = Mode::new(a.j - b.j + c.j, a.k - b.k + c.k);
                    let qt = Quartet::new(a, b, c, fourth);
                    if !flat(&qt) && pq_zero(&qt) && !member.contains(&fourth) {
                        f.add(Property::Closure, Witness::Quartet(qt.canonical()));
                    }
                    for i4 in 0..modes.len() {
                        let d = modes[i4];
                        if a.j - b.j + c.j - d.j != 0 || a.k - b.k + c.k - d.k != 0 {
                            continue;
                        }
                        if (a == b && c == d) || (a == d && b == c) {
                            continue;
                        }
                        let qt = Quartet::new(a, b, c, d);
                        let (g1, g2, g3, g4) = (gen_idx[i1], gen_idx[i2], gen_idx[i3], gen_idx[i4]);
                        let pattern = g1 == g3 && g2 == g4 && (g2 == g1 + 1 || g1 == g2 + 1);
                        let good = !flat(&qt) && pq_zero(&qt);
                        if good && pattern {
                            let fam = if g2 == g1 + 1 { qt } else { Quartet::new(b, a, d, c) };
                            f.families.insert(fam.canonical());
                        } else {
                            if good {
                                f.add(Property::Faithfulness, Witness::Quartet(qt.canonical()));
                            }
                            f.add(Property::LinearRelations, Witness::Quartet(qt.canonical()));
                        }
                    }
                }
            }
            f
        })
        .reduce(Findings::default, Findings::merge);
    Ok(finish(set, findings, opts, needed, "quadruples"))
}
