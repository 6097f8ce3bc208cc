//! Production controller: per-lane sliding weight windows and the periodic
//! strategy calculation that maps weight bins to recipes and trim amounts.
//!
//! Strategy calculation walks the recipes in priority order. For each one it
//! grows a weight range bin by bin from the recipe's lower limit, summing the
//! predicted throughput of the still-available bins on every lane that can
//! route to the recipe's destination. If the upper limit is hit first, lanes
//! that trim on that route extend the range above the upper limit, up to the
//! upper limit plus the recipe's trim allowance. All bins in the final ranges
//! are then taken by the recipe and become unavailable to later recipes.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::design_space::RouteCatalog;
use crate::kernel::SimTime;
use crate::scenario::Recipe;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Number of most recent weights kept per lane.
    #[serde(rename = "N")]
    pub window_size: usize,
    /// Seconds between strategy recomputations.
    #[serde(rename = "t_s")]
    pub recompute_interval_s: f64,
    pub bin_width_g: f64,
    /// Time of the first strategy computation; earlier fillets take the
    /// default recipe.
    pub warmup_s: f64,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            window_size: 1000,
            recompute_interval_s: 10.0,
            bin_width_g: 10.0,
            warmup_s: 60.0,
        }
    }
}

impl ControllerConfig {
    pub fn check(&self) -> Result<(), String> {
        if self.window_size == 0 {
            return Err("N must be >= 1".into());
        }
        if !(self.recompute_interval_s.is_finite() && self.recompute_interval_s > 0.0) {
            return Err(format!("t_s must be > 0, got {}", self.recompute_interval_s));
        }
        if !(self.bin_width_g.is_finite() && self.bin_width_g > 0.0) {
            return Err(format!("bin_width_g must be > 0, got {}", self.bin_width_g));
        }
        if !(self.warmup_s.is_finite() && self.warmup_s >= 0.0) {
            return Err(format!("warmup_s must be >= 0, got {}", self.warmup_s));
        }
        Ok(())
    }

    pub fn bin_of(&self, weight: f64) -> usize {
        bin_of(weight, self.bin_width_g)
    }
}

pub fn bin_of(weight: f64, bin_width: f64) -> usize {
    (weight / bin_width).floor().max(0.0) as usize
}

/// The last N weights measured on one lane with their histogram.
#[derive(Debug, Clone)]
pub struct LaneWindow {
    capacity: usize,
    bin_width: f64,
    samples: VecDeque<(SimTime, f64)>,
    histogram: Vec<u32>,
}

impl LaneWindow {
    pub fn new(capacity: usize, bin_width: f64) -> Self {
        assert!(capacity >= 1 && bin_width > 0.0);
        Self {
            capacity,
            bin_width,
            samples: VecDeque::with_capacity(capacity),
            histogram: Vec::new(),
        }
    }

    pub fn record(&mut self, weight: f64, time: SimTime) {
        if self.samples.len() == self.capacity {
            let (_, old) = self.samples.pop_front().expect("full window");
            self.histogram[bin_of(old, self.bin_width)] -= 1;
        }
        let bin = bin_of(weight, self.bin_width);
        if bin >= self.histogram.len() {
            self.histogram.resize(bin + 1, 0);
        }
        self.histogram[bin] += 1;
        self.samples.push_back((time, weight));
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn weights(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn count(&self, bin: usize) -> u32 {
        self.histogram.get(bin).copied().unwrap_or(0)
    }

    /// Number of bins spanned by the histogram (highest occupied bin + 1 at most).
    pub fn bins(&self) -> usize {
        self.histogram.len()
    }

    /// Time covered by the window in seconds.
    ///
    /// n samples cover n inter-arrival gaps, so the first-to-last distance is
    /// scaled by n/(n-1). The result is never shorter than `min_span`.
    pub fn span_s(&self, min_span: f64) -> f64 {
        let n = self.samples.len();
        if n < 2 {
            return min_span;
        }
        let first = self.samples.front().expect("non-empty").0;
        let last = self.samples.back().expect("non-empty").0;
        let span = (last - first) * n as f64 / (n - 1) as f64;
        span.max(min_span)
    }

    /// Predicted fillets per minute falling into `bins`.
    pub fn predict_per_min<I>(&self, bins: I, min_span: f64) -> f64
    where
        I: IntoIterator<Item = usize>,
    {
        if self.samples.is_empty() {
            return 0.0;
        }
        let count: u64 = bins.into_iter().map(|b| self.count(b) as u64).sum();
        count as f64 / (self.span_s(min_span) / 60.0)
    }
}

/// What a lane does with fillets in one weight bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinAssignment {
    /// Index into the scenario's recipe list.
    pub recipe: usize,
    /// Grams to trim off, when the bin is served through a trimmer.
    pub trim_g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LaneStrategy {
    pub lane: usize,
    pub bins: Vec<Option<BinAssignment>>,
    pub computed_at: SimTime,
}

impl LaneStrategy {
    pub fn get(&self, bin: usize) -> Option<BinAssignment> {
        self.bins.get(bin).copied().flatten()
    }

    pub fn lookup(&self, weight: f64, bin_width: f64) -> Option<BinAssignment> {
        self.get(bin_of(weight, bin_width))
    }

    fn set(&mut self, bin: usize, a: BinAssignment) {
        if bin >= self.bins.len() {
            self.bins.resize(bin + 1, None);
        }
        debug_assert!(self.bins[bin].is_none());
        self.bins[bin] = Some(a);
    }
}

/// Strategies for all lanes from one recomputation.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategySet {
    pub lanes: Vec<LaneStrategy>,
    /// Recipes whose destination no lane can reach.
    pub unservable: Vec<usize>,
    /// Predicted fillets/min allocated to each recipe (indexed like the recipes).
    pub predicted_per_min: Vec<f64>,
}

impl StrategySet {
    /// Bins assigned to `recipe` on `lane`, ascending.
    pub fn bins_for(&self, lane: usize, recipe: usize) -> Vec<(usize, Option<f64>)> {
        self.lanes[lane]
            .bins
            .iter()
            .enumerate()
            .filter_map(|(b, a)| a.filter(|a| a.recipe == recipe).map(|a| (b, a.trim_g)))
            .collect()
    }

    /// Verifies that every assignment is band-feasible, trims only where the
    /// route passes a trimmer, and respects the recipe's trim limit.
    pub fn check_feasible(
        &self,
        recipes: &[Recipe],
        catalog: &RouteCatalog,
        bin_width: f64,
    ) -> Result<(), String> {
        for strat in &self.lanes {
            for (bin, a) in strat.bins.iter().enumerate() {
                let Some(a) = a else { continue };
                let r = &recipes[a.recipe];
                if r.is_default() {
                    return Err(format!("lane {} bin {bin}: default recipe assigned explicitly", strat.lane));
                }
                if !catalog.reaches(strat.lane, r.destination) {
                    return Err(format!("lane {} bin {bin}: {:?} unreachable", strat.lane, r.destination));
                }
                let lo = bin as f64 * bin_width;
                let hi = lo + bin_width;
                let (lo, hi) = match a.trim_g {
                    None => (lo, hi),
                    Some(t) => {
                        if !catalog.trims_on_route(strat.lane, r.destination) {
                            return Err(format!("lane {} bin {bin}: trim without trimmer", strat.lane));
                        }
                        if !(t > 0.0 && t <= r.max_trim_weight_g + EPS) {
                            return Err(format!("lane {} bin {bin}: trim {t} outside (0, {}]", strat.lane, r.max_trim_weight_g));
                        }
                        (lo - t, hi - t)
                    }
                };
                if lo < r.min_fillet_weight_g - EPS || hi > r.max_fillet_weight_g + EPS {
                    return Err(format!(
                        "lane {} bin {bin}: post-trim range [{lo}, {hi}) outside [{}, {}]",
                        strat.lane, r.min_fillet_weight_g, r.max_fillet_weight_g
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Bins lying entirely inside `[min, max]`.
fn direct_bins(r: &Recipe, bw: f64) -> std::ops::Range<usize> {
    let lo = (r.min_fillet_weight_g / bw - EPS).ceil().max(0.0) as usize;
    let hi = (r.max_fillet_weight_g / bw + EPS).floor().max(0.0) as usize;
    lo..hi.max(lo)
}

/// Bins above the direct range that trimming can bring into the band, with
/// their trim amounts. Each bin is cut by (upper edge - max) so every fillet
/// in it ends at or below the upper limit.
fn trim_bins(r: &Recipe, bw: f64) -> Vec<(usize, f64)> {
    let max = r.max_fillet_weight_g;
    if max - bw < r.min_fillet_weight_g - EPS || r.max_trim_weight_g <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut bin = (max / bw + EPS).floor() as usize;
    loop {
        let trim = (bin + 1) as f64 * bw - max;
        if trim > r.max_trim_weight_g + EPS {
            break;
        }
        if trim > EPS {
            out.push((bin, trim));
        }
        bin += 1;
    }
    out
}

/// One full strategy calculation over the current windows.
///
/// `order` lists the non-default recipe indices in processing order.
pub fn compute_strategies(
    recipes: &[Recipe],
    order: &[usize],
    catalog: &RouteCatalog,
    windows: &[LaneWindow],
    cfg: &ControllerConfig,
    now: SimTime,
) -> StrategySet {
    let bw = cfg.bin_width_g;
    let min_span = cfg.recompute_interval_s;
    let lanes = windows.len();
    let mut strategies: Vec<LaneStrategy> = (0..lanes)
        .map(|lane| LaneStrategy {
            lane,
            bins: Vec::new(),
            computed_at: now,
        })
        .collect();
    let mut unservable = Vec::new();
    let mut predicted = vec![0.0; recipes.len()];
    let taken = |s: &LaneStrategy, bin: usize| s.get(bin).is_some();

    for &ri in order {
        let r = &recipes[ri];
        debug_assert!(!r.is_default());
        let target = r.target_throughput_per_min.unwrap_or(0.0);
        let selected: Vec<usize> = (0..lanes).filter(|&l| catalog.reaches(l, r.destination)).collect();
        if selected.is_empty() {
            unservable.push(ri);
            continue;
        }
        let bin_rate = |lanes: &[usize], bin: usize, strategies: &[LaneStrategy]| -> f64 {
            lanes
                .iter()
                .filter(|&&l| !taken(&strategies[l], bin))
                .map(|&l| windows[l].predict_per_min([bin], min_span))
                .sum()
        };

        let mut total = 0.0;
        let mut direct = Vec::new();
        for bin in direct_bins(r, bw) {
            direct.push(bin);
            total += bin_rate(&selected, bin, &strategies);
            if total >= target {
                break;
            }
        }

        let mut trimmed = Vec::new();
        let trimming: Vec<usize> = selected
            .iter()
            .copied()
            .filter(|&l| catalog.trims_on_route(l, r.destination))
            .collect();
        if total < target && !trimming.is_empty() {
            for (bin, trim) in trim_bins(r, bw) {
                trimmed.push((bin, trim));
                total += bin_rate(&trimming, bin, &strategies);
                if total >= target {
                    break;
                }
            }
        }

        predicted[ri] = total;
        for &l in &selected {
            for &bin in &direct {
                if !taken(&strategies[l], bin) {
                    strategies[l].set(bin, BinAssignment { recipe: ri, trim_g: None });
                }
            }
        }
        for &l in &trimming {
            for &(bin, trim) in &trimmed {
                if !taken(&strategies[l], bin) {
                    strategies[l].set(
                        bin,
                        BinAssignment {
                            recipe: ri,
                            trim_g: Some(trim),
                        },
                    );
                }
            }
        }
    }

    StrategySet {
        lanes: strategies,
        unservable,
        predicted_per_min: predicted,
    }
}

/// Controller state owned by one replication.
#[derive(Debug, Clone)]
pub struct Controller {
    config: ControllerConfig,
    recipes: Vec<Recipe>,
    order: Vec<usize>,
    default_recipe: usize,
    catalog: RouteCatalog,
    windows: Vec<LaneWindow>,
    strategy: Option<StrategySet>,
    recomputations: u64,
}

impl Controller {
    pub fn new(config: ControllerConfig, recipes: Vec<Recipe>, catalog: RouteCatalog) -> Self {
        config.check().expect("validated controller config");
        let default_recipe = recipes
            .iter()
            .position(|r| r.is_default())
            .expect("scenario has a default recipe");
        let mut order: Vec<usize> = (0..recipes.len()).filter(|&i| !recipes[i].is_default()).collect();
        order.sort_by_key(|&i| (recipes[i].priority, i));
        let windows = (0..catalog.lane_count())
            .map(|_| LaneWindow::new(config.window_size, config.bin_width_g))
            .collect();
        Self {
            config,
            recipes,
            order,
            default_recipe,
            catalog,
            windows,
            strategy: None,
            recomputations: 0,
        }
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.config
    }

    pub fn recipes(&self) -> &[Recipe] {
        &self.recipes
    }

    pub fn default_recipe(&self) -> usize {
        self.default_recipe
    }

    pub fn window(&self, lane: usize) -> &LaneWindow {
        &self.windows[lane]
    }

    pub fn strategy(&self) -> Option<&StrategySet> {
        self.strategy.as_ref()
    }

    pub fn recomputations(&self) -> u64 {
        self.recomputations
    }

    pub fn record_weight(&mut self, lane: usize, weight: f64, time: SimTime) {
        self.windows[lane].record(weight, time);
    }

    /// Recomputes all lane strategies.
    ///
    /// Panics if the result violates bin exclusivity or band feasibility;
    /// either would be a controller bug.
    pub fn recompute(&mut self, now: SimTime) {
        let set = compute_strategies(
            &self.recipes,
            &self.order,
            &self.catalog,
            &self.windows,
            &self.config,
            now,
        );
        if let Err(e) = set.check_feasible(&self.recipes, &self.catalog, self.config.bin_width_g) {
            panic!("infeasible strategy at t={now}: {e}");
        }
        self.strategy = Some(set);
        self.recomputations += 1;
    }

    /// Recipe and trim instruction for a fillet of `weight` on `lane`.
    /// Unassigned bins, and every fillet before the first strategy, take the
    /// default recipe without trimming.
    pub fn lookup(&self, lane: usize, weight: f64) -> (usize, Option<f64>) {
        self.strategy
            .as_ref()
            .and_then(|s| s.lanes[lane].lookup(weight, self.config.bin_width_g))
            .map(|a| (a.recipe, a.trim_g))
            .unwrap_or((self.default_recipe, None))
    }
}
