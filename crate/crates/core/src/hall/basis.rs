use std::collections::HashMap;
use std::fmt;
use std::ops::Range;
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use super::magnus::MagnusData;
use crate::error::{Error, Result};
use crate::freegroup::{generator_name, Word};

/// Largest nilpotency class a basis may be built for unless a caller asks otherwise.
pub const HARD_CLASS_CAP: u32 = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Generator(usize),
    /// Indices of the left and right factors in the same basis.
    Bracket { left: usize, right: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasicCommutator {
    pub shape: Shape,
    pub weight: u32,
}

/// Basic commutators of weight `≤ class` on `rank` generators, ordered by
/// weight and then lexicographically on `(left, right)`. A bracket `[u, v]`
/// is basic when `u < v` and, if `v = [x, y]`, `x ≤ u`.
pub struct HallBasis {
    rank: usize,
    class: u32,
    commutators: Vec<BasicCommutator>,
    weight_ranges: Vec<Range<usize>>,
    pub(super) magnus: OnceLock<MagnusData>,
    pub(super) conjugates: RwLock<HashMap<(usize, usize, bool), Arc<Vec<BigInt>>>>,
}

impl fmt::Debug for HallBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HallBasis")
            .field("rank", &self.rank)
            .field("class", &self.class)
            .field("len", &self.commutators.len())
            .finish()
    }
}

impl PartialEq for HallBasis {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.class == other.class
    }
}

impl Eq for HallBasis {}

impl HallBasis {
    /// Builds (or fetches from the process-wide cache) the basis for `rank`
    /// generators up to weight `class`, subject to [`HARD_CLASS_CAP`].
    pub fn new(rank: usize, class: u32) -> Result<Arc<HallBasis>> {
        Self::with_cap(rank, class, HARD_CLASS_CAP)
    }

    pub fn with_cap(rank: usize, class: u32, cap: u32) -> Result<Arc<HallBasis>> {
        if rank == 0 || class == 0 {
            return Err(Error::InvalidArgument("rank and class must be positive".into()));
        }
        if class > cap {
            return Err(Error::Complexity { requested: class, cap });
        }
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<HallBasis>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let mut guard = cache.lock().expect("basis cache poisoned");
        Ok(guard
            .entry((rank, class))
            .or_insert_with(|| Arc::new(Self::build(rank, class)))
            .clone())
    }

    fn build(rank: usize, class: u32) -> Self {
        let mut commutators: Vec<BasicCommutator> = (0..rank)
            .map(|i| BasicCommutator {
                shape: Shape::Generator(i),
                weight: 1,
            })
            .collect();
        let mut weight_ranges = vec![0..rank];
        for w in 2..=class {
            let start = commutators.len();
            let mut fresh = Vec::new();
            for u in 0..start {
                let wu = commutators[u].weight;
                if wu >= w {
                    break;
                }
                for (v, cv) in commutators.iter().enumerate().take(start).skip(u + 1) {
                    if wu + cv.weight != w {
                        continue;
                    }
                    let ok = match cv.shape {
                        Shape::Generator(_) => true,
                        Shape::Bracket { left, .. } => left <= u,
                    };
                    if ok {
                        fresh.push((u, v));
                    }
                }
            }
            fresh.sort_unstable();
            commutators.extend(fresh.into_iter().map(|(left, right)| BasicCommutator {
                shape: Shape::Bracket { left, right },
                weight: w,
            }));
            weight_ranges.push(start..commutators.len());
        }
        HallBasis {
            rank,
            class,
            commutators,
            weight_ranges,
            magnus: OnceLock::new(),
            conjugates: RwLock::new(HashMap::new()),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn class(&self) -> u32 {
        self.class
    }

    pub fn len(&self) -> usize {
        self.commutators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commutators.is_empty()
    }

    pub fn commutators(&self) -> &[BasicCommutator] {
        &self.commutators
    }

    pub fn commutator(&self, i: usize) -> BasicCommutator {
        self.commutators[i]
    }

    pub fn weight(&self, i: usize) -> u32 {
        self.commutators[i].weight
    }

    /// Basis indices of the weight-`w` commutators.
    pub fn weight_range(&self, w: u32) -> Range<usize> {
        if w == 0 || w > self.class {
            return 0..0;
        }
        self.weight_ranges[(w - 1) as usize].clone()
    }

    /// The literal word of a basic commutator, with `[x, y] = x y x^-1 y^-1`.
    pub fn expand(&self, i: usize) -> Word {
        match self.commutators[i].shape {
            Shape::Generator(g) => Word::generator(self.rank, g).expect("generator in range"),
            Shape::Bracket { left, right } => {
                Word::commutator(&self.expand(left), &self.expand(right)).expect("same rank")
            }
        }
    }

    pub fn name(&self, i: usize) -> String {
        match self.commutators[i].shape {
            Shape::Generator(g) => generator_name(self.rank, g),
            Shape::Bracket { left, right } => format!("[{},{}]", self.name(left), self.name(right)),
        }
    }

    /// Index of the commutator printed as `name`, if any.
    pub fn find(&self, name: &str) -> Option<usize> {
        (0..self.len()).find(|&i| self.name(i) == name)
    }
}

fn mobius(n: u32) -> i32 {
    let mut n = n;
    let mut result = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            result = -result;
        }
        p += 1;
    }
    if n > 1 {
        result = -result;
    }
    result
}

/// Number of basic commutators of weight `n` on `k` generators (Witt's formula).
pub fn witt_count(k: u32, n: u32) -> BigInt {
    assert!(k >= 1 && n >= 1, "witt_count needs k, n >= 1");
    let mut total = BigInt::zero();
    for d in 1..=n {
        if n % d == 0 {
            let mu = mobius(d);
            if mu != 0 {
                total += BigInt::from(mu) * BigInt::from(k).pow(n / d);
            }
        }
    }
    let (q, r) = total.div_rem(&BigInt::from(n));
    debug_assert!(r.is_zero());
    q
}
