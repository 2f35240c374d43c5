//! Random closed formulas for property tests and fuzzing.

use rand::Rng;

use crate::formula::{Formula, Term};

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub max_depth: usize,
    /// Predicate names with fixed arities.
    pub predicates: Vec<(String, usize)>,
    pub constants: Vec<String>,
    /// Variable names; several quantifiers may reuse one to exercise shadowing.
    pub variables: Vec<String>,
    /// Chance that a binary node is a biconditional.
    pub iff_probability: f64,
    /// Upper bound on biconditionals per formula; each one doubles its operands
    /// during normalization.
    pub max_iff: usize,
    pub allow_equality: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_depth: 5,
            predicates: [("P", 1), ("Q", 1), ("R", 2), ("S", 1), ("T", 0), ("U", 2)]
                .into_iter()
                .map(|(p, a)| (p.to_string(), a))
                .collect(),
            constants: ["a", "b", "c"].map(String::from).to_vec(),
            variables: ["x", "y", "z"].map(String::from).to_vec(),
            iff_probability: 0.05,
            max_iff: 1,
            allow_equality: false,
        }
    }
}

impl GenConfig {
    /// Unary predicates only, so the oracle is exact at domain `2^preds`.
    pub fn monadic() -> Self {
        GenConfig {
            predicates: [("P", 1), ("Q", 1), ("S", 1)].into_iter().map(|(p, a)| (p.to_string(), a)).collect(),
            ..GenConfig::default()
        }
    }
}

struct State<'c> {
    cfg: &'c GenConfig,
    scope: Vec<String>,
    iffs: usize,
}

impl State<'_> {
    fn term<R: Rng>(&self, rng: &mut R) -> Term {
        let n = self.scope.len() + self.cfg.constants.len();
        let k = rng.random_range(0..n);
        match self.scope.get(k) {
            Some(v) => Term::var(v.clone()),
            None => Term::constant(self.cfg.constants[k - self.scope.len()].clone()),
        }
    }

    fn atom<R: Rng>(&self, rng: &mut R) -> Formula {
        if self.cfg.allow_equality && rng.random_bool(0.1) {
            return Formula::atom(crate::formula::EQUALITY, vec![self.term(rng), self.term(rng)]);
        }
        if self.cfg.predicates.is_empty() {
            return Formula::Bool(rng.random_bool(0.5));
        }
        let (p, arity) = &self.cfg.predicates[rng.random_range(0..self.cfg.predicates.len())];
        Formula::atom(p.clone(), (0..*arity).map(|_| self.term(rng)).collect())
    }

    fn formula<R: Rng>(&mut self, rng: &mut R, depth: usize) -> Formula {
        let leaf_chance = if depth == 0 { 1.0 } else { 0.15 + 0.6 / depth as f64 };
        if rng.random_bool(leaf_chance.min(1.0)) {
            return if rng.random_bool(0.03) { Formula::Bool(rng.random_bool(0.5)) } else { self.atom(rng) };
        }
        let d = depth - 1;
        match rng.random_range(0..7) {
            0 => Formula::not(self.formula(rng, d)),
            1 | 2 => {
                let n = rng.random_range(2..=3);
                let cs = (0..n).map(|_| self.formula(rng, d)).collect();
                if rng.random_bool(0.5) { Formula::and(cs) } else { Formula::or(cs) }
            }
            3 => {
                let a = self.formula(rng, d);
                let b = self.formula(rng, d);
                if self.iffs < self.cfg.max_iff && rng.random_bool(self.cfg.iff_probability) {
                    self.iffs += 1;
                    Formula::iff(a, b)
                } else {
                    Formula::implies(a, b)
                }
            }
            _ if self.cfg.variables.is_empty() => self.atom(rng),
            k => {
                let x = self.cfg.variables[rng.random_range(0..self.cfg.variables.len())].clone();
                self.scope.push(x.clone());
                let body = self.formula(rng, d);
                self.scope.pop();
                if k % 2 == 0 { Formula::forall(x, body) } else { Formula::exists(x, body) }
            }
        }
    }
}

/// A closed formula of depth at most `cfg.max_depth`.
pub fn random_formula<R: Rng>(rng: &mut R, cfg: &GenConfig) -> Formula {
    let mut st = State {
        cfg,
        scope: Vec::new(),
        iffs: 0,
    };
    st.formula(rng, cfg.max_depth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::free_vars;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_and_bounded() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..500 {
            let f = random_formula(&mut rng, &cfg);
            assert!(free_vars(&f).is_empty(), "{f}");
            assert!(f.depth() <= cfg.max_depth + 1, "{f}");
            assert!(crate::parse::parse_formula(&f.to_string()).unwrap() == f);
        }
    }
}
