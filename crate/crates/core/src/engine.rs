//! Evaluation context: configuration and memo tables.

use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use core::cell::{Cell, RefCell};

use crate::arith::Rat;
use crate::classnum::ClassNumberCache;
use crate::error::Result;
use crate::lattice::{self, GramMatrix, LatticeProfile};

/// Tunable limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Largest `p^r` the counting oracle may use.
    pub oracle_depth_cap: u128,
    /// Largest number of enumeration cells for direct representation counts.
    pub enum_budget: u128,
    /// Entries kept per memo table before it is flushed.
    pub memo_cap: usize,
    /// Samples checked per piece of a synthesized formula.
    pub sample_budget: usize,
    /// Largest modulus a synthesized piecewise formula may use.
    pub modulus_cap: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            oracle_depth_cap: 1 << 62,
            enum_budget: 1 << 26,
            memo_cap: 1 << 20,
            sample_budget: 4,
            modulus_cap: 1 << 16,
        }
    }
}

/// Memoized evaluation context. Not `Sync`; use one engine per thread.
#[derive(Debug)]
pub struct Engine {
    pub config: Config,
    pub(crate) classes: RefCell<ClassNumberCache>,
    profiles: RefCell<BTreeMap<GramMatrix, Rc<LatticeProfile>>>,
    pub(crate) plans: RefCell<BTreeMap<(GramMatrix, u64), crate::genusformula::Plan>>,
    pub(crate) fallbacks: Cell<u64>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::new(Config::default())
    }
}

impl Engine {
    pub fn new(config: Config) -> Self {
        let cap = config.memo_cap;
        Engine {
            config,
            classes: RefCell::new(ClassNumberCache::new(cap)),
            profiles: RefCell::new(BTreeMap::new()),
            plans: RefCell::new(BTreeMap::new()),
            fallbacks: Cell::new(0),
        }
    }

    /// `H(x)` through the conductor formula, memoized.
    pub fn hurwitz(&self, x: &Rat) -> Rat {
        self.classes.borrow_mut().hurwitz(x)
    }

    /// `H(n)` by summing enumerated class numbers, memoized.
    pub fn hurwitz_enum(&self, n: u64) -> Rat {
        self.classes.borrow_mut().hurwitz_enum(n)
    }

    /// Memoized [`lattice::profile`].
    pub fn profile(&self, gram: &GramMatrix) -> Result<Rc<LatticeProfile>> {
        if let Some(p) = self.profiles.borrow().get(gram) {
            return Ok(p.clone());
        }
        let p = Rc::new(lattice::profile(gram)?);
        let mut tab = self.profiles.borrow_mut();
        if tab.len() >= self.config.memo_cap {
            tab.clear();
        }
        tab.insert(*gram, p.clone());
        Ok(p)
    }

    /// Number of times evaluation fell back to the semi-oracle.
    pub fn fallback_count(&self) -> u64 {
        self.fallbacks.get()
    }
}
