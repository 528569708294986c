//! The frequency set Λ = Λ₁ ∪ … ∪ Λ_N: base sets with nuclear-family
//! relations, the anisotropic scaling (j, k) ↦ (p·j, q·k), generation
//! weights and property verification.

mod build;
mod verify;

pub use build::{build_base_set, PlacementBox, Strategy};
pub use verify::{verify_properties, verify_properties_exhaustive, Property, PropertyCheck, PropertyReport, VerifyOptions, Witness};

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::resonance::{Mode, Quartet};

/// Unscaled generations together with the nuclear families linking them.
///
/// `families[i]` holds quartets `(a, b, c, d)` with `a, c` in generation `i`
/// and `b, d` in generation `i + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseSet {
    generations: Vec<Vec<Mode>>,
    families: Vec<Vec<Quartet>>,
}

/// Family relations of one mode.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Relations {
    pub spouse: BTreeMap<Mode, Mode>,
    pub children: BTreeMap<Mode, [Mode; 2]>,
    pub parents: BTreeMap<Mode, [Mode; 2]>,
    pub sibling: BTreeMap<Mode, Mode>,
}

fn sorted_pair(a: Mode, b: Mode) -> [Mode; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

impl BaseSet {
    /// Builds a base set, checking that families link consecutive
    /// generations and that the relation maps are consistent.
    pub fn new(generations: Vec<Vec<Mode>>, families: Vec<Vec<Quartet>>) -> Result<Self> {
        let n = generations.len();
        if n == 0 {
            return Err(Error::InvalidInput("a set needs at least one generation".into()));
        }
        if families.len() + 1 != n {
            return Err(Error::RelationsMissing(format!(
                "{} family layers for {n} generations",
                families.len()
            )));
        }
        let mut seen = HashSet::new();
        for g in &generations {
            for m in g {
                if !seen.insert(*m) {
                    return Err(Error::InvalidInput(format!("mode {m:?} repeated")));
                }
            }
        }
        let set = BaseSet { generations, families };
        for (i, layer) in set.families.iter().enumerate() {
            for f in layer {
                let [a, b, c, d] = f.0;
                let gi = |m: &Mode| set.generations[i].contains(m);
                let gn = |m: &Mode| set.generations[i + 1].contains(m);
                if !(gi(&a) && gi(&c) && gn(&b) && gn(&d)) {
                    return Err(Error::RelationsMissing(format!(
                        "family {f:?} does not link generations {} and {}",
                        i + 1,
                        i + 2
                    )));
                }
                if !f.is_momentum_closed() || a == c || b == d {
                    return Err(Error::RelationsMissing(format!("family {f:?} is not a parallelogram")));
                }
            }
        }
        set.relations_checked()?;
        Ok(set)
    }

    /// A set without relations, for adversarial inputs to the verifier.
    pub fn unrelated(generations: Vec<Vec<Mode>>) -> Result<Self> {
        let layers = generations.len().saturating_sub(1);
        Self::new(generations, vec![Vec::new(); layers])
    }

    /// The unit square: Λ̃₁ = {(0,0), (1,1)}, Λ̃₂ = {(1,0), (0,1)}.
    pub fn unit_square() -> Self {
        let m = Mode::new;
        Self::new(
            vec![vec![m(0, 0), m(1, 1)], vec![m(1, 0), m(0, 1)]],
            vec![vec![Quartet::new(m(0, 0), m(0, 1), m(1, 1), m(1, 0))]],
        )
        .expect("unit square is valid")
    }

    pub fn n_generations(&self) -> usize {
        self.generations.len()
    }

    pub fn generations(&self) -> &[Vec<Mode>] {
        &self.generations
    }

    pub fn families(&self) -> &[Vec<Quartet>] {
        &self.families
    }

    fn relations_checked(&self) -> Result<Relations> {
        let mut r = Relations::default();
        let clash = |what: &str, m: &Mode| Error::RelationsMissing(format!("{what} of {m:?} is not unique"));
        for layer in &self.families {
            for f in layer {
                let [a, b, c, d] = f.0;
                let kids = sorted_pair(b, d);
                for (x, y) in [(a, c), (c, a)] {
                    if r.spouse.insert(x, y).is_some() {
                        return Err(clash("spouse", &x));
                    }
                    r.children.insert(x, kids);
                }
                let pars = sorted_pair(a, c);
                for (x, y) in [(b, d), (d, b)] {
                    if r.sibling.insert(x, y).is_some() {
                        return Err(clash("sibling", &x));
                    }
                    r.parents.insert(x, pars);
                }
            }
        }
        Ok(r)
    }

    pub fn relations(&self) -> Relations {
        self.relations_checked().expect("validated at construction")
    }
}

/// A scaled set Λ ⊂ pℤ × qℤ.
#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSet {
    base: BaseSet,
    p: i64,
    q: i64,
    generations: Vec<Vec<Mode>>,
    generation_of: HashMap<Mode, usize>,
}

/// Scales every generation by (j, k) ↦ (p·j, q·k).
pub fn scale_set(base: &BaseSet, p: i64, q: i64) -> Result<LambdaSet> {
    if p < 1 || q < 1 {
        return Err(Error::InvalidInput(format!("scaling ({p},{q}) must be positive")));
    }
    let generations: Vec<Vec<Mode>> = base
        .generations
        .iter()
        .map(|g| g.iter().map(|m| m.scaled(p, q)).collect())
        .collect();
    let generation_of = generations
        .iter()
        .enumerate()
        .flat_map(|(i, g)| g.iter().map(move |m| (*m, i)))
        .collect();
    Ok(LambdaSet {
        base: base.clone(),
        p,
        q,
        generations,
        generation_of,
    })
}

impl LambdaSet {
    pub fn base(&self) -> &BaseSet {
        &self.base
    }

    pub fn scaling(&self) -> (i64, i64) {
        (self.p, self.q)
    }

    pub fn n_generations(&self) -> usize {
        self.generations.len()
    }

    pub fn generations(&self) -> &[Vec<Mode>] {
        &self.generations
    }

    /// All modes, generation by generation.
    pub fn modes(&self) -> Vec<Mode> {
        self.generations.iter().flatten().copied().collect()
    }

    pub fn mode_set(&self) -> HashSet<Mode> {
        self.generation_of.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.generation_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generation_of.is_empty()
    }

    pub fn contains(&self, m: &Mode) -> bool {
        self.generation_of.contains_key(m)
    }

    /// Zero-based generation index of a mode.
    pub fn generation_of(&self, m: &Mode) -> Option<usize> {
        self.generation_of.get(m).copied()
    }

    /// Scaled nuclear families, layer by layer.
    pub fn families(&self) -> Vec<Vec<Quartet>> {
        self.base
            .families
            .iter()
            .map(|l| l.iter().map(|f| f.scaled(self.p, self.q)).collect())
            .collect()
    }

    /// Relation maps on the scaled modes.
    pub fn relations(&self) -> Relations {
        let s = |m: &Mode| m.scaled(self.p, self.q);
        let r = self.base.relations();
        Relations {
            spouse: r.spouse.iter().map(|(a, b)| (s(a), s(b))).collect(),
            children: r.children.iter().map(|(a, [b, c])| (s(a), [s(b), s(c)])).collect(),
            parents: r.parents.iter().map(|(a, [b, c])| (s(a), [s(b), s(c)])).collect(),
            sibling: r.sibling.iter().map(|(a, b)| (s(a), s(b))).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&LambdaSetJson::from(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: LambdaSetJson = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("lambda set json: {e}")))?;
        doc.try_into()
    }
}

/// Generation weights Sᵢ = Σ_{n∈Λᵢ} |n|^{2s}.
pub fn generation_weights(set: &LambdaSet, s: f64) -> Vec<f64> {
    set.generations
        .iter()
        .map(|g| {
            g.iter()
                .map(|m| if m.norm_sq() == 0 { 0.0 } else { (m.norm_sq() as f64).powf(s) })
                .sum()
        })
        .collect()
}

/// min and max of |n|/q over Λ, origin excluded.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadiusBracket {
    pub r_lo: f64,
    pub r_hi: f64,
    pub origin_present: bool,
}

pub fn radius_bracket(set: &LambdaSet) -> RadiusBracket {
    let q = set.q as f64;
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    let mut origin = false;
    for m in set.modes() {
        if m.norm_sq() == 0 {
            origin = true;
            continue;
        }
        let r = m.norm() / q;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    if !lo.is_finite() {
        lo = 0.0;
    }
    RadiusBracket {
        r_lo: lo,
        r_hi: hi,
        origin_present: origin,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LambdaSetJson {
    #[serde(rename = "N")]
    n: usize,
    p: i64,
    q: i64,
    generations: Vec<Vec<Mode>>,
    relations: RelationsJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationsJson {
    /// Unscaled nuclear families per layer, `[a, b, c, d]`.
    families: Vec<Vec<[Mode; 4]>>,
    spouse: Vec<[Mode; 2]>,
    children: Vec<(Mode, [Mode; 2])>,
    parents: Vec<(Mode, [Mode; 2])>,
    sibling: Vec<[Mode; 2]>,
}

impl From<&LambdaSet> for LambdaSetJson {
    fn from(s: &LambdaSet) -> Self {
        let r = s.relations();
        LambdaSetJson {
            n: s.n_generations(),
            p: s.p,
            q: s.q,
            generations: s.generations.clone(),
            relations: RelationsJson {
                families: s.base.families.iter().map(|l| l.iter().map(|f| f.0).collect()).collect(),
                spouse: r.spouse.into_iter().map(|(a, b)| [a, b]).collect(),
                children: r.children.into_iter().collect(),
                parents: r.parents.into_iter().collect(),
                sibling: r.sibling.into_iter().map(|(a, b)| [a, b]).collect(),
            },
        }
    }
}

impl TryFrom<LambdaSetJson> for LambdaSet {
    type Error = Error;

    fn try_from(doc: LambdaSetJson) -> Result<Self> {
        if doc.n != doc.generations.len() {
            return Err(Error::InvalidInput(format!(
                "N = {} but {} generations",
                doc.n,
                doc.generations.len()
            )));
        }
        if doc.p < 1 || doc.q < 1 {
            return Err(Error::InvalidInput("scaling must be positive".into()));
        }
        let unscale = |m: &Mode| -> Result<Mode> {
            if m.j % doc.p != 0 || m.k % doc.q != 0 {
                return Err(Error::InvalidInput(format!("mode {m:?} is not in pZ x qZ")));
            }
            Ok(Mode::new(m.j / doc.p, m.k / doc.q))
        };
        let generations = doc
            .generations
            .iter()
            .map(|g| g.iter().map(unscale).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let families = doc
            .relations
            .families
            .iter()
            .map(|l| l.iter().map(|f| Quartet(*f)).collect())
            .collect();
        let base = BaseSet::new(generations, families)?;
        let set = scale_set(&base, doc.p, doc.q)?;
        let r = set.relations();
        let listed = RelationsJson {
            families: Vec::new(),
            spouse: r.spouse.into_iter().map(|(a, b)| [a, b]).collect(),
            children: r.children.into_iter().collect(),
            parents: r.parents.into_iter().collect(),
            sibling: r.sibling.into_iter().map(|(a, b)| [a, b]).collect(),
        };
        if listed.spouse != doc.relations.spouse
            || listed.children != doc.relations.children
            || listed.parents != doc.relations.parents
            || listed.sibling != doc.relations.sibling
        {
            return Err(Error::RelationsMissing("relation maps disagree with the listed families".into()));
        }
        Ok(set)
    }
}
