use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::eval::{aggregate, CubeScore, EvalReport, InterclassMatrix};
use crate::forward::{synthesize_rgb, MixingMatrix};
use crate::inference::predict_parallel;
use crate::network::{ArchitectureSpec, NetworkParams, Real};
use crate::spectral::SpectralCube;
use crate::train::{assemble_dataset, linear_baseline, train, AffineMap, TrainConfig};

/// Cube ids per fold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub folds: Vec<Vec<usize>>,
}

/// Seeded shuffle of `ids` followed by contiguous chunking into `k` folds
/// whose sizes differ by at most one.
pub fn kfold_split(ids: &[usize], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > ids.len() {
        return Err(Error::param(format!("cannot split {} ids into {k} folds", ids.len())));
    }
    let mut shuffled = ids.to_vec();
    shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (base, extra) = (ids.len() / k, ids.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(shuffled[start..start + len].to_vec());
        start += len;
    }
    Ok(FoldAssignment { folds })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossvalOutcome {
    /// Held-out scores of the trained network.
    pub network: EvalReport,
    /// Held-out scores of the affine least-squares map fitted on the same pixels.
    pub baseline: EvalReport,
    pub folds: FoldAssignment,
    pub loss_histories: Vec<Vec<f64>>,
}

fn fit_models<T: Real>(
    cubes: &[&SpectralCube],
    mix: &MixingMatrix,
    spec: &ArchitectureSpec,
    cfg: &TrainConfig,
) -> Result<(NetworkParams<T>, AffineMap, Vec<f64>)> {
    let data = assemble_dataset(cubes, mix, cfg.samples_per_cube, cfg.specular_mask_threshold, cfg.seed)?;
    log::info!("training on {} pixels from {} cubes", data.len(), cubes.len());
    let trained = train::<T>(&data, spec.clone(), cfg)?;
    let params = trained.params.with_grid(mix.grid().clone())?;
    Ok((params, linear_baseline(&data)?, trained.loss_history))
}

fn score<T: Real>(
    params: &NetworkParams<T>,
    baseline: Option<&AffineMap>,
    cube: &SpectralCube,
    mix: &MixingMatrix,
    workers: usize,
) -> Result<(CubeScore, Option<CubeScore>)> {
    let rgb = synthesize_rgb(cube, mix)?;
    let net = CubeScore::compute(&predict_parallel(params, &rgb, workers)?, cube, 1.0)?;
    let base = baseline
        .map(|b| CubeScore::compute(&b.predict_image(&rgb, mix.grid())?, cube, 1.0))
        .transpose()?;
    Ok((net, base))
}

/// k-fold cross-validation at cube level. Every fold trains a network and an
/// affine baseline on the out-of-fold pixels and scores both on the
/// synthetic RGB of each held-out cube.
pub fn run_crossval<T: Real>(
    cubes: &[SpectralCube],
    mix: &MixingMatrix,
    spec: &ArchitectureSpec,
    cfg: &TrainConfig,
    k: usize,
) -> Result<CrossvalOutcome> {
    let ids: Vec<usize> = (0..cubes.len()).collect();
    let folds = kfold_split(&ids, k, cfg.seed)?;
    let mut net_scores: Vec<Option<CubeScore>> = vec![None; cubes.len()];
    let mut base_scores: Vec<Option<CubeScore>> = vec![None; cubes.len()];
    let mut histories = Vec::with_capacity(k);
    for (f, held_out) in folds.folds.iter().enumerate() {
        let train_set: Vec<&SpectralCube> = ids
            .iter()
            .filter(|id| !held_out.contains(id))
            .map(|&id| &cubes[id])
            .collect();
        log::info!("fold {}/{k}", f + 1);
        let (params, baseline, history) = fit_models::<T>(&train_set, mix, spec, cfg)?;
        histories.push(history);
        for &id in held_out {
            let (net, base) = score(&params, Some(&baseline), &cubes[id], mix, cfg.workers)?;
            net_scores[id] = Some(net);
            base_scores[id] = base;
        }
    }
    let collect = |v: Vec<Option<CubeScore>>| v.into_iter().map(|s| s.expect("every cube is held out once")).collect::<Vec<_>>();
    Ok(CrossvalOutcome {
        network: aggregate(&collect(net_scores), mix.grid())?,
        baseline: aggregate(&collect(base_scores), mix.grid())?,
        folds,
        loss_histories: histories,
    })
}

/// Trains one network per class on all of its cubes and scores it on every
/// class. Entry `[i][j]` is the mean pooled PSNR of the class-`i` model on
/// class-`j` cubes.
pub fn run_interclass<T: Real>(
    classes: &[(String, Vec<SpectralCube>)],
    mix: &MixingMatrix,
    spec: &ArchitectureSpec,
    cfg: &TrainConfig,
) -> Result<InterclassMatrix> {
    if classes.len() < 2 {
        return Err(Error::param("inter-class evaluation needs at least 2 classes"));
    }
    if let Some((name, _)) = classes.iter().find(|(_, c)| c.is_empty()) {
        return Err(Error::param(format!("class {name} has no cubes")));
    }
    let mut psnr = Vec::with_capacity(classes.len());
    for (name, train_cubes) in classes {
        log::info!("training on class {name}");
        let refs: Vec<&SpectralCube> = train_cubes.iter().collect();
        let (params, _, _) = fit_models::<T>(&refs, mix, spec, cfg)?;
        let mut row = Vec::with_capacity(classes.len());
        for (_, test_cubes) in classes {
            let scores = test_cubes
                .iter()
                .map(|c| score(&params, None, c, mix, cfg.workers).map(|s| s.0))
                .collect::<Result<Vec<_>>>()?;
            row.push(aggregate(&scores, mix.grid())?.overall_mean_db);
        }
        psnr.push(row);
    }
    Ok(InterclassMatrix {
        classes: classes.iter().map(|(n, _)| n.clone()).collect(),
        psnr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::build_mixing_matrix;
    use crate::spectral::{CameraResponse, WavelengthGrid};
    use proptest::prelude::*;

    #[test]
    fn even_split() {
        let ids: Vec<usize> = (0..10).collect();
        let f = kfold_split(&ids, 5, 0).unwrap();
        assert!(f.folds.iter().all(|x| x.len() == 2));
    }

    #[test]
    fn uneven_split() {
        let ids: Vec<usize> = (0..11).collect();
        let mut sizes: Vec<usize> = kfold_split(&ids, 5, 3).unwrap().folds.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, [2, 2, 2, 2, 3]);
    }

    #[test]
    fn bad_k() {
        let ids: Vec<usize> = (0..4).collect();
        assert!(matches!(kfold_split(&ids, 5, 0), Err(Error::Parameter(_))));
        assert!(matches!(kfold_split(&ids, 1, 0), Err(Error::Parameter(_))));
    }

    proptest! {
        #[test]
        fn folds_partition(n in 2usize..60, k in 2usize..10, seed in any::<u64>()) {
            prop_assume!(k <= n);
            let ids: Vec<usize> = (100..100 + n).collect();
            let f = kfold_split(&ids, k, seed).unwrap();
            prop_assert_eq!(f.clone(), kfold_split(&ids, k, seed).unwrap());
            let mut all: Vec<usize> = f.folds.concat();
            all.sort();
            prop_assert_eq!(all, ids);
            let sizes: Vec<usize> = f.folds.iter().map(Vec::len).collect();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        }
    }

    fn cube(seed: usize) -> SpectralCube {
        let data = (0..6 * 5)
            .flat_map(|p| (0..24).map(move |b| 0.2 + 0.6 * (((p + seed) * 13 + b * 5) % 31) as f32 / 31.0))
            .collect();
        SpectralCube::new(6, 5, WavelengthGrid::msi_default(), data).unwrap()
    }

    fn mix() -> MixingMatrix {
        build_mixing_matrix(&CameraResponse::default(), &WavelengthGrid::msi_default(), true).unwrap()
    }

    fn quick_cfg() -> TrainConfig {
        TrainConfig {
            epochs: 2,
            batch_size: 16,
            ..Default::default()
        }
    }

    #[test]
    fn identical_cubes_give_identical_folds() {
        let cubes = vec![cube(0); 5];
        let out = run_crossval::<f32>(&cubes, &mix(), &ArchitectureSpec::with_width(4), &quick_cfg(), 5).unwrap();
        assert_eq!(out.network.rows.len(), 24);
        assert_eq!(out.network.cubes, 5);
        // every fold trains on the same pixels with the same seed
        assert!(out.network.rows.iter().all(|r| r.std_psnr_db < 1e-9));
        assert!(out.loss_histories.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn interclass_copies_are_symmetric() {
        let set: Vec<SpectralCube> = (0..2).map(cube).collect();
        let classes = vec![("a".to_string(), set.clone()), ("b".to_string(), set)];
        let m = run_interclass::<f32>(&classes, &mix(), &ArchitectureSpec::with_width(4), &quick_cfg()).unwrap();
        assert_eq!(m.psnr.len(), 2);
        assert_eq!(m.psnr[0][0], m.psnr[0][1]);
        assert_eq!(m.psnr[0], m.psnr[1]);
        assert!(m.to_csv().starts_with("train_class,a,b\n"));
    }

    #[test]
    fn interclass_needs_nonempty_classes() {
        let classes = vec![("a".to_string(), vec![cube(0)]), ("b".to_string(), vec![])];
        assert!(matches!(
            run_interclass::<f32>(&classes, &mix(), &ArchitectureSpec::with_width(4), &quick_cfg()),
            Err(Error::Parameter(_))
        ));
    }
}
