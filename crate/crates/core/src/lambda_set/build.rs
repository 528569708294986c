use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaseSet;
use crate::error::{Error, Result};
use crate::resonance::{Mode, Quartet};

/// Closed coordinate ranges for placed modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementBox {
    pub j: (i64, i64),
    pub k: (i64, i64),
}

impl PlacementBox {
    pub fn square(half_width: i64) -> Self {
        PlacementBox {
            j: (-half_width, half_width),
            k: (-half_width, half_width),
        }
    }

    pub fn contains(&self, m: &Mode) -> bool {
        (self.j.0..=self.j.1).contains(&m.j) && (self.k.0..=self.k.1).contains(&m.k)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Strategy {
    /// Depth-first placement of rectangles with incremental pruning.
    Backtracking {
        region: PlacementBox,
        node_budget: u64,
        max_generations: usize,
    },
}

impl Strategy {
    /// Default search region and budget for `n` generations.
    pub fn for_generations(n: usize) -> Self {
        let half = match n {
            0..=2 => 4,
            3 => 8,
            4 => 100,
            _ => 1000,
        };
        Strategy::Backtracking {
            region: PlacementBox::square(half),
            node_budget: 2_000_000,
            max_generations: 5,
        }
    }
}

const MATCH_TRIES: usize = 12;
const FIRST_TRIES: usize = 200;
const ATTEMPT_NODES: u64 = 20_000;

struct Search {
    rng: ChaCha8Rng,
    region: PlacementBox,
    budget: u64,
    nodes: u64,
    attempt_end: u64,
    exhausted: bool,
    n: usize,
    size: usize,
    set: HashSet<Mode>,
    list: Vec<Mode>,
    gens: Vec<Vec<Mode>>,
    couples: Vec<Vec<(Mode, Mode)>>,
    families: Vec<Vec<Quartet>>,
}

fn is_right_angle(x: Mode, y: Mode, z: Mode) -> bool {
    x != y && z != y && (x - y).dot(&(z - y)) == 0
}

impl Search {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget || self.nodes > self.attempt_end {
            self.exhausted = true;
        }
        !self.exhausted
    }

    /// No new linear relation other than `family`, and no rectangle left
    /// with a missing vertex.
    fn admissible(&self, new: &[Mode], family: Option<&Quartet>) -> bool {
        let allowed: Vec<Quartet> = family
            .map(|f| {
                let [a, b, c, d] = f.0;
                vec![f.canonical(), Quartet::new(b, a, d, c).canonical()]
            })
            .unwrap_or_default();
        let has = |m: &Mode| self.set.contains(m) || new.contains(m);
        let all: Vec<Mode> = self.list.iter().chain(new.iter()).copied().collect();
        for &fresh in new {
            for slot in 0..3 {
                for &u in &all {
                    for &v in &all {
                        let (x, y, z) = match slot {
                            0 => (fresh, u, v),
                            1 => (u, fresh, v),
                            _ => (u, v, fresh),
                        };
                        let w = x - y + z;
                        let inside = has(&w);
                        if inside && y != x && y != z {
                            if !allowed.contains(&Quartet::new(x, y, z, w).canonical()) {
                                return false;
                            }
                        } else if !inside && is_right_angle(x, y, z) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn push(&mut self, ms: &[Mode]) {
        for m in ms {
            self.set.insert(*m);
            self.list.push(*m);
        }
    }

    fn pop(&mut self, count: usize) {
        for _ in 0..count {
            let m = self.list.pop().expect("pushed");
            self.set.remove(&m);
        }
    }

    fn random_point(&mut self) -> Mode {
        Mode::new(
            self.rng.gen_range(self.region.j.0..=self.region.j.1),
            self.rng.gen_range(self.region.k.0..=self.region.k.1),
        )
    }

    /// Places the first generation greedily from random candidates.
    fn place_first(&mut self) -> bool {
        while self.list.len() < self.size {
            let mut placed = false;
            for _ in 0..FIRST_TRIES {
                if !self.tick() {
                    return false;
                }
                let m = self.random_point();
                if m.norm_sq() == 0 || self.set.contains(&m) || !self.admissible(&[m], None) {
                    continue;
                }
                self.push(&[m]);
                placed = true;
                break;
            }
            if !placed {
                return false;
            }
        }
        let g: Vec<Mode> = self.list.clone();
        self.couples.push(g.chunks(2).map(|c| (c[0], c[1])).collect());
        self.gens.push(g);
        true
    }

    /// Half-diagonal choices for the children of the couple `(a, c)`.
    fn child_offsets(&mut self, a: Mode, c: Mode) -> Vec<Mode> {
        let v = a - c;
        let r2 = v.norm_sq();
        let r = (r2 as f64).sqrt().ceil() as i64;
        let mut ws = Vec::new();
        for x in -r..=r {
            let rest = r2 - (x as i128).pow(2);
            if rest < 0 {
                continue;
            }
            let y = (rest as f64).sqrt().round() as i64;
            for y in [y, -y] {
                if (y as i128).pow(2) != rest {
                    continue;
                }
                let w = Mode::new(x, y);
                let same_parity = (w.j - v.j).rem_euclid(2) == 0 && (w.k - v.k).rem_euclid(2) == 0;
                if same_parity && w != v && w != -v && w > -w && !ws.contains(&w) {
                    ws.push(w);
                }
            }
        }
        ws.sort_by(|p, q| (p.k as f64).atan2(p.j as f64).total_cmp(&(q.k as f64).atan2(q.j as f64)));
        if !ws.is_empty() {
            let shift = self.rng.gen_range(0..ws.len());
            ws.rotate_left(shift);
        }
        ws
    }

    fn layer(&mut self, i: usize, ci: usize) -> bool {
        if i + 1 == self.n {
            return true;
        }
        if ci == self.couples[i].len() {
            let kids: Vec<Mode> = self.families[i].iter().flat_map(|f| [f.0[1], f.0[3]]).collect();
            self.gens.push(kids.clone());
            if i + 2 == self.n {
                return true;
            }
            for _ in 0..MATCH_TRIES {
                let Some(m) = self.matching(&kids, &self.families[i].clone()) else {
                    continue;
                };
                self.couples.push(m);
                self.families.push(Vec::new());
                if self.layer(i + 1, 0) {
                    return true;
                }
                self.families.pop();
                self.couples.pop();
                if self.exhausted {
                    break;
                }
            }
            self.gens.pop();
            return false;
        }
        let (a, c) = self.couples[i][ci];
        for w in self.child_offsets(a, c) {
            if !self.tick() {
                return false;
            }
            let mid = a + c;
            let b = Mode::new((mid.j + w.j) / 2, (mid.k + w.k) / 2);
            let d = Mode::new((mid.j - w.j) / 2, (mid.k - w.k) / 2);
            if !self.region.contains(&b) || !self.region.contains(&d) {
                continue;
            }
            if b.norm_sq() == 0 || d.norm_sq() == 0 || self.set.contains(&b) || self.set.contains(&d) {
                continue;
            }
            let fam = Quartet::new(a, b, c, d);
            if !self.admissible(&[b, d], Some(&fam)) {
                continue;
            }
            self.push(&[b, d]);
            self.families[i].push(fam);
            if self.layer(i, ci + 1) {
                return true;
            }
            self.families[i].pop();
            self.pop(2);
            if self.exhausted {
                return false;
            }
        }
        false
    }

    /// A random pairing of the new generation in which no couple are siblings.
    fn matching(&mut self, kids: &[Mode], fams: &[Quartet]) -> Option<Vec<(Mode, Mode)>> {
        let sibling = |x: Mode, y: Mode| fams.iter().any(|f| (f.0[1] == x && f.0[3] == y) || (f.0[1] == y && f.0[3] == x));
        let mut pool = kids.to_vec();
        pool.shuffle(&mut self.rng);
        let mut out = Vec::new();
        while let Some(x) = pool.pop() {
            let pos = pool.iter().position(|&y| !sibling(x, y))?;
            let y = pool.remove(pos);
            out.push((x, y));
        }
        Some(out)
    }
}

/// Searches for a base set with `n` generations of `2^{n−1}` modes each,
/// linked by nuclear families and free of any other linear relation or
/// incomplete rectangle.
pub fn build_base_set(n: usize, strategy: &Strategy, seed: u64) -> Result<BaseSet> {
    let Strategy::Backtracking {
        region,
        node_budget,
        max_generations,
    } = strategy;
    if n < 2 || n > *max_generations {
        return Err(Error::InvalidInput(format!("N = {n} outside 2..={max_generations}")));
    }
    let size = 1usize << (n - 1);
    let mut search = Search {
        rng: ChaCha8Rng::seed_from_u64(seed),
        region: *region,
        budget: *node_budget,
        nodes: 0,
        attempt_end: 0,
        exhausted: false,
        n,
        size,
        set: HashSet::new(),
        list: Vec::new(),
        gens: Vec::new(),
        couples: Vec::new(),
        families: Vec::new(),
    };
    let per_attempt = (*node_budget / 16).max(ATTEMPT_NODES.min(*node_budget));
    while search.nodes < search.budget {
        search.attempt_end = search.nodes + per_attempt;
        search.exhausted = false;
        search.set.clear();
        search.list.clear();
        search.gens.clear();
        search.couples.clear();
        search.families = vec![Vec::new()];
        if search.place_first() && search.layer(0, 0) {
            let families = search.families[..n - 1].to_vec();
            return BaseSet::new(search.gens, families);
        }
    }
    Err(Error::SearchExhausted {
        nodes: search.nodes.min(search.budget),
    })
}
