use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use super::coarsen::{coarsen_labels, coarsen_variables};
use super::correlation::{estimate_correlations, label_interpolation, EstimateOptions};
use super::interpolation::{build_interpolation, select_coarse, InterpolationMatrix};
use crate::energy::{Energy, Labeling};
use crate::error::{Error, Result};
use crate::format;
use crate::icm::icm;
use crate::moves::{alpha_beta_swap, alpha_expansion, MoveOptions};
use crate::scalar::Real;
use crate::solution::Solution;

/// Which degrees of freedom a pyramid coarsens.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Coarsening {
    #[default]
    Variables,
    Labels,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiscaleParams {
    /// Coverage threshold for variable selection.
    pub beta: f64,
    /// Nonzeros kept per interpolation row (variables).
    pub delta: usize,
    pub label_beta: f64,
    pub label_delta: usize,
    /// ICM restarts for the correlation estimate.
    pub restarts: usize,
    /// ICM sweeps per restart.
    pub sweeps: usize,
    /// `sigma = sigma_scale * max V`.
    pub sigma_scale: f64,
    /// Random sweep order in the correlation descents.
    pub shuffled: bool,
    pub seed: u64,
    /// Coarsening by variables continues while a level has at least this many.
    pub min_vars: usize,
    /// Coarsening by labels continues while a level has more than this many.
    pub min_labels: usize,
    /// A level must shrink by at least this fraction to be kept.
    pub min_shrink: f64,
}

impl Default for MultiscaleParams {
    fn default() -> Self {
        MultiscaleParams {
            beta: 0.2,
            delta: 3,
            label_beta: 0.75,
            label_delta: 2,
            restarts: 10,
            sweeps: 10,
            sigma_scale: 0.1,
            shuffled: false,
            seed: 0,
            min_vars: 10,
            min_labels: 2,
            min_shrink: 0.05,
        }
    }
}

/// Descent solver run at every level of a pyramid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refiner {
    Icm { max_sweeps: usize },
    Swap(MoveOptions),
    Expand(MoveOptions),
}

impl Refiner {
    pub fn refine<T: Real>(&self, energy: &Energy<T>, init: &Labeling) -> Result<Solution<T>> {
        match self {
            Refiner::Icm { max_sweeps } => icm(energy, init, *max_sweeps),
            Refiner::Swap(opts) => alpha_beta_swap(energy, init, *opts),
            Refiner::Expand(opts) => alpha_expansion(energy, Some(init), *opts),
        }
    }
}

/// Energies of decreasing size linked by interpolation matrices;
/// `interps[s]` maps level `s + 1` to level `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyPyramid<T> {
    levels: Vec<Energy<T>>,
    interps: Vec<InterpolationMatrix<T>>,
    mode: Coarsening,
}

fn level_seed(seed: u64, level: usize) -> u64 {
    seed ^ ((level as u64 + 1) << 40)
}

impl<T: Real> EnergyPyramid<T> {
    pub fn build(energy: &Energy<T>, mode: Coarsening, params: &MultiscaleParams) -> Result<Self> {
        if !(params.beta > 0.0 && params.beta < 1.0 && params.label_beta > 0.0 && params.label_beta < 1.0) {
            return Err(Error::Instance("coverage thresholds must lie in (0, 1)".into()));
        }
        if mode == Coarsening::Variables && !energy.is_pairwise_symmetric() {
            return Err(Error::Instance("coarsening by variables needs a symmetric V".into()));
        }
        let mut levels = vec![energy.clone()];
        let mut interps = Vec::new();
        loop {
            let fine = levels.last().expect("non-empty");
            let size = match mode {
                Coarsening::Variables => fine.num_vars(),
                Coarsening::Labels => fine.num_labels(),
            };
            let go_on = match mode {
                Coarsening::Variables => size >= params.min_vars,
                Coarsening::Labels => size > params.min_labels,
            };
            if !go_on {
                break;
            }
            let p = match mode {
                Coarsening::Variables => {
                    let seed = level_seed(params.seed, levels.len() - 1);
                    let opts = EstimateOptions {
                        restarts: params.restarts,
                        sweeps: params.sweeps,
                        sigma_scale: params.sigma_scale,
                        shuffled: params.shuffled,
                        seed,
                    };
                    let c = estimate_correlations(fine, &opts)?;
                    let set = select_coarse(&c, params.beta);
                    build_interpolation(&c, &set, params.delta)?.0
                }
                Coarsening::Labels => label_interpolation(fine.pairwise(), params.label_beta, params.label_delta)?,
            };
            if p.num_coarse() as f64 > (1.0 - params.min_shrink) * size as f64 || p.num_coarse() == 0 {
                break;
            }
            let coarse = match mode {
                Coarsening::Variables => coarsen_variables(fine, &p)?,
                Coarsening::Labels => coarsen_labels(fine, &p)?,
            };
            log::debug!("pyramid level {}: {} -> {}", levels.len(), size, p.num_coarse());
            interps.push(p);
            levels.push(coarse);
        }
        Ok(EnergyPyramid { levels, interps, mode })
    }

    /// Finest first.
    pub fn levels(&self) -> &[Energy<T>] {
        &self.levels
    }

    pub fn interps(&self) -> &[InterpolationMatrix<T>] {
        &self.interps
    }

    pub fn mode(&self) -> Coarsening {
        self.mode
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Writes `level_<s>.pwe` for every level and `interp_<s>.txt` (`i j v`
    /// triplets) for every interpolation into `dir`.
    pub fn dump(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (s, level) in self.levels.iter().enumerate() {
            let f = BufWriter::new(File::create(dir.join(format!("level_{s}.pwe")))?);
            format::write_energy(f, level)?;
        }
        for (s, p) in self.interps.iter().enumerate() {
            let f = BufWriter::new(File::create(dir.join(format!("interp_{s}.txt")))?);
            format::write_interpolation(f, p)?;
        }
        Ok(())
    }

    /// Carries a labeling of level `s + 1` to level `s`: interpolate, then
    /// round each row by argmax with the lowest label winning ties.
    pub fn prolong(&self, s: usize, coarse: &Labeling) -> Labeling {
        let p = &self.interps[s];
        match self.mode {
            Coarsening::Variables => {
                let l = self.levels[s].num_labels();
                let mut row = vec![T::zero(); l];
                let labels = (0..p.num_fine())
                    .map(|i| {
                        row.iter_mut().for_each(|x| *x = T::zero());
                        for (j, v) in p.row(i) {
                            row[coarse[j]] += v;
                        }
                        crate::energy::argmax_lowest(ndarray::ArrayView1::from(&row[..]))
                    })
                    .collect();
                Labeling::new(labels)
            }
            Coarsening::Labels => {
                let dense = p.to_dense();
                let best: Vec<usize> =
                    (0..p.num_coarse()).map(|a| crate::energy::argmax_lowest(dense.column(a))).collect();
                Labeling::new(coarse.values().iter().map(|&a| best[a]).collect())
            }
        }
    }

    /// Coarse-to-fine optimization: winner-take-all at the coarsest level,
    /// then refine, prolong and round down to the finest level.
    pub fn solve(&self, refiner: &Refiner) -> Result<MultiscaleSolution<T>> {
        let coarsest = self.levels.last().expect("non-empty");
        let mut current = coarsest.winner_take_all();
        let mut level_energies = vec![T::zero(); self.depth()];
        for s in (0..self.depth()).rev() {
            let energy = &self.levels[s];
            if s + 1 < self.depth() {
                current = self.prolong(s, &current);
            }
            let rounded = energy.evaluate(&current)?;
            let refined = refiner.refine(energy, &current)?;
            assert!(refined.energy <= rounded + T::slack(rounded), "refinement increased the energy at level {s}");
            level_energies[s] = refined.energy;
            current = refined.labeling;
        }
        let energy = self.levels[0].evaluate(&current)?;
        Ok(MultiscaleSolution {
            labeling: current,
            energy,
            level_energies,
            level_sizes: self.levels.iter().map(|e| (e.num_vars(), e.num_labels())).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiscaleSolution<T> {
    pub labeling: Labeling,
    /// Energy of `labeling` under the original energy.
    pub energy: T,
    /// Post-refinement energy at every level, finest first.
    pub level_energies: Vec<T>,
    /// `(variables, labels)` per level, finest first.
    pub level_sizes: Vec<(usize, usize)>,
}

/// Builds the pyramid and runs the coarse-to-fine optimization.
pub fn solve_multiscale<T: Real>(
    energy: &Energy<T>,
    refiner: &Refiner,
    mode: Coarsening,
    params: &MultiscaleParams,
) -> Result<MultiscaleSolution<T>> {
    EnergyPyramid::build(energy, mode, params)?.solve(refiner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use ndarray::Array2;

    fn grid(seed: u64, side: usize, l: usize, lambda: f64) -> Energy<f64> {
        let mut r = rng::seeded(seed);
        let n = side * side;
        let d = Array2::from_shape_fn((n, l), |_| rng::standard_normal(&mut r));
        let mut v = Array2::zeros((l, l));
        for a in 0..l {
            for b in a + 1..l {
                let x = rng::uniform01(&mut r);
                v[[a, b]] = x;
                v[[b, a]] = x;
            }
        }
        let mut edges = Vec::new();
        for y in 0..side {
            for x in 0..side {
                let i = y * side + x;
                if x + 1 < side {
                    edges.push((i, i + 1, lambda * rng::uniform(&mut r, -1.0, 1.0)));
                }
                if y + 1 < side {
                    edges.push((i, i + side, lambda * rng::uniform(&mut r, -1.0, 1.0)));
                }
            }
        }
        Energy::new(d, v, edges).unwrap()
    }

    #[test]
    fn unary_only_is_exact() {
        let mut r = rng::seeded(2);
        let d = Array2::from_shape_fn((40, 4), |_| rng::standard_normal(&mut r));
        let e = Energy::unary_only(d).unwrap();
        let s =
            solve_multiscale(&e, &Refiner::Icm { max_sweeps: 50 }, Coarsening::Variables, &Default::default()).unwrap();
        assert_eq!(s.labeling, e.winner_take_all());
    }

    #[test]
    fn pyramid_shrinks_and_is_deterministic() {
        let e = grid(5, 12, 4, 5.0);
        let params = MultiscaleParams { seed: 3, ..Default::default() };
        let p = EnergyPyramid::build(&e, Coarsening::Variables, &params).unwrap();
        assert!(p.depth() > 1);
        for w in p.levels().windows(2) {
            assert!(w[1].num_vars() < w[0].num_vars());
        }
        let last = p.levels().last().unwrap().num_vars();
        assert!(last < 10 || p.depth() > 1);
        for (s, interp) in p.interps().iter().enumerate() {
            assert!(interp.max_row_len() <= params.delta);
            assert_eq!(interp.num_fine(), p.levels()[s].num_vars());
        }
        assert_eq!(p, EnergyPyramid::build(&e, Coarsening::Variables, &params).unwrap());
        let a = p.solve(&Refiner::Icm { max_sweeps: 100 }).unwrap();
        let b = solve_multiscale(&e, &Refiner::Icm { max_sweeps: 100 }, Coarsening::Variables, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.energy, e.evaluate(&a.labeling).unwrap());
    }

    #[test]
    fn label_pyramid_runs_swap() {
        let e = grid(8, 6, 8, 1.0);
        let params = MultiscaleParams::default();
        let p = EnergyPyramid::build(&e, Coarsening::Labels, &params).unwrap();
        assert!(p.depth() > 1);
        let s = p.solve(&Refiner::Swap(MoveOptions::default())).unwrap();
        assert_eq!(s.labeling.len(), 36);
        s.labeling.check_range(8).unwrap();
    }

    #[test]
    fn asymmetric_v_is_rejected_for_variables() {
        let e =
            Energy::new(Array2::zeros((12, 2)), ndarray::array![[0.0, 1.0], [2.0, 0.0]], vec![(0, 1, 1.0)]).unwrap();
        assert!(EnergyPyramid::build(&e, Coarsening::Variables, &Default::default()).is_err());
    }
}
