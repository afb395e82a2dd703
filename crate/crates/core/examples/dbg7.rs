use covsep::sep::{upper_bound, validate_product_witness};
use covsep::structure::pt_symmetrize;
use covsep::symplectic::{random_qcm, ModeLayout, Purity, CoordOrdering};
use covsep::linalg::min_eig_sym;
use covsep::{SolverConfig, Tolerances};

fn main() {
    let tol = Tolerances::<f64>::default();
    let _cfg = SolverConfig::<f64>::default();
    for seed in 0..40u64 {
        let n = 1 + (seed % 3) as usize;
        let layout = ModeLayout::mode_wise(1, n).unwrap();
        let v = random_qcm::<f64>(seed, layout, Purity::Mixed { nu_max: 2.5 }, 0.8);
        let Some(sym) = pt_symmetrize(&v, &tol) else { continue };
        let nb = upper_bound(&sym, 0.0, &tol);
        match nb {
            Ok(nb) => {
                let ga = nb.re().clone();
                // gamma_a validity
                let la = ModeLayout::single(1, CoordOrdering::ModeWise).unwrap();
                let val = covsep::symplectic::is_qcm(&ga, &la, &tol).unwrap();
                // recover gamma_b through the structure pathway: use schur directly
                use covsep::analysis::{schur_complement, BlockPartition};
                let da = 2;
                let d = sym.dim();
                let mut diff = sym.mat().clone();
                diff.view_mut((0,0),(da,da)).copy_from(&(sym.block_a() - &ga));
                let part = BlockPartition::new(da, d).unwrap();
                let mut eps = 0.0;
                let mut gb = None;
                for _ in 0..4 {
                    match schur_complement(&diff, part, eps) {
                        Ok(g) => { gb = Some(g); break; }
                        Err(_) => { eps = if eps == 0.0 { 1e-9 * sym.scale() } else { eps * 10.0 }; }
                    }
                }
                let gb = gb.unwrap();
                let lb = ModeLayout::single(n, CoordOrdering::ModeWise).unwrap();
                let valb = covsep::symplectic::is_qcm(&gb, &lb, &tol).unwrap();
                let check = validate_product_witness(&sym, &[ga.clone(), gb.clone()], &[1, n], &tol).unwrap();
                let amin = min_eig_sym(&(sym.block_a() - &ga));
                println!("seed {seed}: n={n} eps={eps:.1e} ga_valid={}({:.2e}) gb_valid={}({:.2e}) witness_min={:.3e} scale={:.2} VA-ga_min={:.2e} ok={}",
                    val.valid, val.min_eig, valb.valid, valb.min_eig, check.min_eig, sym.scale(), amin, check.ok);
            }
            Err(e) => println!("seed {seed}: upper_bound err {e}"),
        }
    }
}
