//! Seeded random snapshots, views, transitions and formulas for property
//! tests, benchmarks and the examples.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{
    apply_transition, CarId, CarState, Extent, Lane, LaneInterval, SensorConfig, SensorRule, TrafficSnapshot,
    TransitionLabel, View,
};
use crate::rational::{int, ratio, Rational};
use crate::syntax::{chop_depth, Formula, Modality, Sort, Term, Var};

/// Shape of generated formulas.
#[derive(Clone, Debug)]
pub struct FormulaConfig {
    /// Nesting depth of connectives.
    pub depth: usize,
    /// Bound on the chop depth after expansion.
    pub max_chop_depth: usize,
    pub spatial_atoms: bool,
    pub length: bool,
    pub width: bool,
    pub hchop: bool,
    pub vchop: bool,
    /// Car and lane quantifiers.
    pub quantifiers: bool,
    pub real_quantifiers: bool,
    pub boxes: Vec<&'static str>,
    /// Abbreviations such as `somewhere`, `l < t` and `F ^ t`.
    pub derived: bool,
    /// Free car variables the valuation will bind.
    pub free_cars: Vec<String>,
}

impl Default for FormulaConfig {
    fn default() -> Self {
        FormulaConfig {
            depth: 4,
            max_chop_depth: 3,
            spatial_atoms: true,
            length: true,
            width: true,
            hchop: true,
            vchop: true,
            quantifiers: true,
            real_quantifiers: false,
            boxes: vec![],
            derived: true,
            free_cars: vec![],
        }
    }
}

impl FormulaConfig {
    /// Everything the syntax has, for printing and parsing.
    pub fn full() -> Self {
        FormulaConfig {
            depth: 5,
            max_chop_depth: usize::MAX,
            real_quantifiers: true,
            boxes: vec!["r", "c", "wd_r", "wd_c", "tau"],
            ..FormulaConfig::default()
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
}

const CAR_NAMES: &[&str] = &["A", "B", "C", "D", "E", "F", "G", "H"];

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    /// `n / den` for `n` uniform in `lo·den ..= hi·den`.
    pub fn rational(&mut self, lo: i64, hi: i64, den: i64) -> Rational {
        ratio(self.rng.gen_range(lo * den..=hi * den), den)
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    /// A sane snapshot with up to `max_cars` cars on lanes `0..=max_lane`.
    pub fn snapshot(&mut self, max_cars: usize, max_lane: Lane) -> TrafficSnapshot {
        let n = self.rng.gen_range(0..=max_cars.min(CAR_NAMES.len()));
        let mut cars = BTreeMap::new();
        for name in &CAR_NAMES[..n] {
            let lane = self.rng.gen_range(0..=max_lane);
            let mut res = vec![lane];
            let mut clm = vec![];
            let up = (lane < max_lane).then_some(lane + 1);
            let down = lane.checked_sub(1);
            let neighbours: Vec<Lane> = up.into_iter().chain(down).collect();
            if let Some(&other) = neighbours.choose(&mut self.rng) {
                if self.chance(0.25) {
                    res.push(other);
                } else if self.chance(0.4) {
                    clm.push(other);
                }
            }
            let pos = self.rational(0, 40, 2);
            let spd = int(self.rng.gen_range(0..=12));
            let acc = self.rational(-2, 2, 2);
            cars.insert(CarId::from(*name), CarState::new(res, clm, pos, spd, acc));
        }
        TrafficSnapshot::new(max_lane, cars).expect("generated cars are sane")
    }

    /// Fixed lengths per observed car, with a fixed fallback.
    pub fn sensors(&mut self, ts: &TrafficSnapshot) -> SensorConfig {
        let fallback = SensorRule::Fixed(self.rational(1, 6, 2));
        let mut cfg = SensorConfig::new(fallback).expect("positive");
        let observers: Vec<CarId> = ts.cars().keys().cloned().collect();
        for observer in &observers {
            for observed in &observers {
                if self.chance(0.3) {
                    let len = self.rational(1, 8, 2);
                    cfg = cfg.with_entry(observer.clone(), observed.clone(), len).expect("positive");
                }
            }
        }
        cfg
    }

    pub fn lanes(&mut self, max_lane: Lane) -> LaneInterval {
        if self.chance(0.05) {
            return LaneInterval::default();
        }
        let a = self.rng.gen_range(0..=max_lane);
        let b = self.rng.gen_range(0..=max_lane);
        LaneInterval::new(a.min(b), a.max(b)).expect("ordered")
    }

    pub fn extent(&mut self, lo: i64, hi: i64) -> Extent {
        let a = self.rational(lo, hi, 2);
        let len = if self.chance(0.05) { int(0) } else { self.rational(0, 20, 2) };
        Extent::new(a.clone(), a + len).expect("ordered")
    }

    /// A view owned by one of the listed cars, or by `E` on an empty road.
    pub fn view(&mut self, ts: &TrafficSnapshot) -> View {
        let owner = ts
            .cars()
            .keys()
            .cloned()
            .collect::<Vec<_>>()
            .choose(&mut self.rng)
            .cloned()
            .unwrap_or_else(|| CarId::from("E"));
        let lanes = self.lanes(ts.max_lane());
        View::new(lanes, self.extent(-5, 45), owner)
    }

    /// An enabled transition of the given kind (`c`, `wd_c`, `r`, `wd_r`,
    /// `t` or `acc`), if one exists.
    pub fn transition(&mut self, ts: &TrafficSnapshot, kind: &str) -> Option<TransitionLabel> {
        let mut cars: Vec<CarId> = ts.cars().keys().cloned().collect();
        cars.shuffle(&mut self.rng);
        let candidates: Vec<TransitionLabel> = match kind {
            "t" => return Some(TransitionLabel::Time(self.rational(0, 5, 4))),
            "acc" => {
                let acc = self.rational(-3, 3, 2);
                return cars.first().map(|car| TransitionLabel::SetAcc { car: car.clone(), acc });
            }
            "r" => cars.iter().map(|car| TransitionLabel::Reserve { car: car.clone() }).collect(),
            "wd_c" => cars.iter().map(|car| TransitionLabel::WithdrawClaim { car: car.clone() }).collect(),
            "c" => cars
                .iter()
                .flat_map(|car| ts.lanes().map(move |lane| TransitionLabel::Claim { car: car.clone(), lane }))
                .collect(),
            "wd_r" => cars
                .iter()
                .flat_map(|car| ts.lanes().map(move |lane| TransitionLabel::WithdrawReserve { car: car.clone(), lane }))
                .collect(),
            other => panic!("unknown transition kind `{other}`"),
        };
        let enabled: Vec<TransitionLabel> =
            candidates.into_iter().filter(|l| apply_transition(ts, l).is_ok()).collect();
        enabled.choose(&mut self.rng).cloned()
    }

    /// A well-sorted formula; free car variables come from `cfg.free_cars`.
    pub fn formula(&mut self, cfg: &FormulaConfig) -> Formula {
        loop {
            let mut scope: Vec<Var> = cfg.free_cars.iter().map(|n| Var::car(n.as_str())).collect();
            let f = self.formula_at(cfg, cfg.depth, &mut scope);
            if cfg.max_chop_depth == usize::MAX || chop_depth(&f) <= cfg.max_chop_depth {
                return f;
            }
        }
    }

    fn car_term(&mut self, scope: &[Var]) -> Term {
        let cars: Vec<&Var> = scope.iter().filter(|v| v.sort == Sort::Car).collect();
        match cars.choose(&mut self.rng) {
            Some(v) if self.chance(0.7) => Term::var(v),
            _ => Term::Ego,
        }
    }

    fn real_term(&mut self, cfg: &FormulaConfig, scope: &[Var], depth: usize) -> Term {
        let reals: Vec<&Var> = scope.iter().filter(|v| v.sort == Sort::Real).collect();
        match self.rng.gen_range(0..5) {
            0 if cfg.length => Term::Length,
            1 if cfg.width => Term::Width,
            2 if !reals.is_empty() => Term::var(reals.choose(&mut self.rng).expect("non-empty")),
            3 if depth > 0 => Term::plus(self.real_term(cfg, scope, depth - 1), self.real_term(cfg, scope, depth - 1)),
            _ => Term::real(self.rational(0, 6, 2)),
        }
    }

    fn lane_term(&mut self, scope: &[Var]) -> Term {
        let lanes: Vec<&Var> = scope.iter().filter(|v| v.sort == Sort::Lane).collect();
        match lanes.choose(&mut self.rng) {
            Some(v) if self.chance(0.6) => Term::var(v),
            _ => Term::LaneConst(self.rng.gen_range(0..=3)),
        }
    }

    fn atom(&mut self, cfg: &FormulaConfig, scope: &[Var]) -> Formula {
        loop {
            let f = match self.rng.gen_range(0..12) {
                0 => Formula::Top,
                1 => Formula::Bot,
                2 | 3 if cfg.spatial_atoms => Formula::re(self.car_term(scope)),
                4 if cfg.spatial_atoms => Formula::cl(self.car_term(scope)),
                5 if cfg.spatial_atoms && cfg.length && cfg.width => Formula::Free,
                6 if cfg.length => {
                    let q = self.rational(0, 6, 2);
                    match self.rng.gen_range(0..3) {
                        1 if cfg.derived => Formula::LengthLt(Term::real(q)),
                        2 if cfg.derived => Formula::LengthGt(Term::real(q)),
                        _ => Formula::length_is(Term::real(q)),
                    }
                }
                7 if cfg.width => {
                    let n = Term::int(self.rng.gen_range(0..=3));
                    match self.rng.gen_range(0..3) {
                        1 if cfg.derived => Formula::WidthLt(n),
                        2 if cfg.derived => Formula::WidthGt(n),
                        _ => Formula::width_is(n),
                    }
                }
                8 => {
                    let (a, b) = (self.car_term(scope), self.car_term(scope));
                    if cfg.derived && self.chance(0.5) {
                        Formula::Neq(a, b)
                    } else {
                        Formula::eq(a, b)
                    }
                }
                9 if scope.iter().any(|v| v.sort == Sort::Lane) => Formula::eq(self.lane_term(scope), self.lane_term(scope)),
                10 if scope.iter().any(|v| v.sort == Sort::Real) || cfg.real_quantifiers => {
                    Formula::eq(self.real_term(cfg, scope, 1), self.real_term(cfg, scope, 1))
                }
                _ => continue,
            };
            return f;
        }
    }

    fn fresh(&mut self, scope: &[Var], sort: Sort) -> Var {
        let base = match sort {
            Sort::Car => "c",
            Sort::Real => "x",
            Sort::Lane => "n",
        };
        let taken = scope.iter().filter(|v| v.name.starts_with(base)).count();
        if taken > 0 && self.chance(0.2) {
            // reuse a name to exercise shadowing
            return Var::new(format!("{base}{}", self.rng.gen_range(0..taken)), sort);
        }
        Var::new(format!("{base}{taken}"), sort)
    }

    fn formula_at(&mut self, cfg: &FormulaConfig, depth: usize, scope: &mut Vec<Var>) -> Formula {
        if depth == 0 || self.chance(0.2) {
            return self.atom(cfg, scope);
        }
        let d = depth - 1;
        loop {
            let f = match self.rng.gen_range(0..16) {
                0 => Formula::not(self.formula_at(cfg, d, scope)),
                1 => Formula::and(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                2 => Formula::or(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                3 => Formula::implies(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                4 if cfg.derived => Formula::iff(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                5 | 6 if cfg.hchop => Formula::hchop(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                7 if cfg.vchop => Formula::vchop(self.formula_at(cfg, d, scope), self.formula_at(cfg, d, scope)),
                8 | 9 if cfg.quantifiers || cfg.real_quantifiers => {
                    let mut sorts = vec![];
                    if cfg.quantifiers {
                        sorts.extend([Sort::Car, Sort::Car, Sort::Lane]);
                    }
                    if cfg.real_quantifiers {
                        sorts.push(Sort::Real);
                    }
                    let sort = *sorts.choose(&mut self.rng).expect("non-empty");
                    let x = self.fresh(scope, sort);
                    scope.push(x.clone());
                    let body = self.formula_at(cfg, d, scope);
                    scope.pop();
                    if self.chance(0.5) {
                        Formula::forall(x, body)
                    } else {
                        Formula::exists(x, body)
                    }
                }
                10 if !cfg.boxes.is_empty() => {
                    let kind = *cfg.boxes.choose(&mut self.rng).expect("non-empty");
                    let c = self.car_term(scope);
                    let m = match kind {
                        "r" => Modality::Reserve(c),
                        "c" => Modality::Claim(c),
                        "wd_r" => Modality::WithdrawReserve(c),
                        "wd_c" => Modality::WithdrawClaim(c),
                        _ => Modality::Tau,
                    };
                    let body = self.formula_at(cfg, d, scope);
                    if cfg.derived && self.chance(0.3) {
                        Formula::diamond(m, body)
                    } else {
                        Formula::boxm(m, body)
                    }
                }
                11 if cfg.derived && cfg.hchop && cfg.vchop => {
                    let body = self.formula_at(cfg, d, scope);
                    if self.chance(0.5) {
                        Formula::somewhere(body)
                    } else {
                        Formula::everywhere(body)
                    }
                }
                12 if cfg.derived && cfg.hchop => {
                    let body = self.formula_at(cfg, d, scope);
                    if self.chance(0.5) {
                        Formula::diamond_l(body)
                    } else {
                        Formula::box_l(body)
                    }
                }
                13 if cfg.derived && cfg.length => {
                    let body = self.formula_at(cfg, d, scope);
                    Formula::restrict(body, Term::real(self.rational(0, 6, 2)))
                }
                14 | 15 => self.atom(cfg, scope),
                _ => continue,
            };
            return f;
        }
    }
}
