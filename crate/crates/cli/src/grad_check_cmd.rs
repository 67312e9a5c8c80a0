//! `grad-check`: verify the analytic gradient of the full loss against
//! central finite differences, across random small models and trees.
//!
//! Each seed builds a model at the requested dims, randomizes its
//! parameters, samples a random labeled tree (or pair), and compares every
//! parameter element.  `--corrupt NAME` adds a loss term routed around the
//! tape for that parameter — finite differences see it, the analytic sweep
//! cannot — proving the checker fails loudly and names the culprit.

use crate::errors::CliError;
use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tghyper::gradcheck::grad_check;
use tghyper::models::{Dims, Fusion, Model, ModelSpec, Variant};
use tghyper::tape::Tape;
use tghyper::tensor::Tensor;
use tghyper::training::{example_loss, DropoutCtx};
use tghyper::treebank::{Example, Tree, TreeKind, Vocab};
use tghyper::Task;

const NUM_WORDS: usize = 6;
const NUM_TAGS: usize = 4;
/// Checks run at deliberately small widths; each dimension is capped here.
const MAX_DIM: usize = 8;

#[derive(Args)]
pub struct GradCheckArgs {
    /// Encoder variant, e.g. RecNN, TreeLSTM, TG-HRecNN, TG-HTreeLSTM,
    /// DC-RecNN, DC-TreeLSTM
    #[arg(long)]
    pub variant: String,
    /// concat or multi (hyper variants only)
    #[arg(long, default_value = "concat")]
    pub fusion: String,
    /// classify or match
    #[arg(long, default_value = "classify")]
    pub task: String,
    /// Number of random (model, tree) instances
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    /// Finite-difference step
    #[arg(long, default_value_t = 1e-4)]
    pub step: f64,
    /// Largest allowed relative error
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 4)]
    pub word_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub hidden_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub hyper_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub fused_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub tag_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    /// Negative control: corrupt this parameter's loss contribution so the
    /// check must fail naming it
    #[arg(long)]
    pub corrupt: Option<String>,
}

pub fn run(args: GradCheckArgs) -> Result<(), CliError> {
    let variant = Variant::parse(&args.variant).ok_or_else(|| {
        let names: Vec<&str> = Variant::ALL.iter().map(|v| v.name()).collect();
        CliError::Usage(format!(
            "--variant: unknown value {:?} (expected one of {})",
            args.variant,
            names.join(", ")
        ))
    })?;
    let fusion = Fusion::parse(&args.fusion).ok_or_else(|| {
        CliError::Usage(format!(
            "--fusion: unknown value {:?} (expected concat or multi)",
            args.fusion
        ))
    })?;
    let task = Task::parse(&args.task).ok_or_else(|| {
        CliError::Usage(format!(
            "--task: unknown value {:?} (expected classify or match)",
            args.task
        ))
    })?;
    for (flag, value) in [
        ("--word-dim", args.word_dim),
        ("--hidden-dim", args.hidden_dim),
        ("--hyper-dim", args.hyper_dim),
        ("--fused-dim", args.fused_dim),
        ("--tag-dim", args.tag_dim),
        ("--classes", args.classes),
    ] {
        if !(1..=MAX_DIM).contains(&value) {
            return Err(CliError::Usage(format!(
                "{flag}: must be between 1 and {MAX_DIM} for finite-difference checking, got {value}"
            )));
        }
    }
    if args.classes < 2 {
        return Err(CliError::Usage(format!(
            "--classes: need at least 2, got {}",
            args.classes
        )));
    }
    if args.seeds == 0 {
        return Err(CliError::Usage("--seeds: need at least 1".to_string()));
    }
    let dims = Dims {
        word_dim: args.word_dim,
        hidden_dim: args.hidden_dim,
        hyper_dim: args.hyper_dim,
        fused_dim: args.fused_dim,
        tag_dim: args.tag_dim,
    };

    let mut checked = 0usize;
    let mut skipped = 0usize;
    let mut failed_seeds = 0u64;
    let mut offenders: Vec<String> = Vec::new();
    // Worst relative error over every parameter of every seed.
    let mut worst = (f64::NEG_INFINITY, String::new(), 0u64);
    for seed in 1..=args.seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE ^ seed);
        let mut model = Model::build(ModelSpec {
            variant,
            fusion,
            task,
            dims,
            num_classes: args.classes,
            mlp_dim: None,
            words: token_vocab("w", NUM_WORDS),
            tags: token_vocab("T", NUM_TAGS),
            word_init: None,
            seed,
        });
        // The build initializes near zero and pins the scale projections to
        // the identity point; draw parameters that exercise everything.
        for (_, p) in model.params.iter_mut() {
            if p.fixed {
                continue;
            }
            for v in p.value.data_mut() {
                *v = rng.random_range(-0.6..0.6);
            }
        }
        let example = random_example(&mut rng, task, args.classes);
        let corrupt_id = match &args.corrupt {
            Some(name) => Some(model.params.id(name).ok_or_else(|| {
                let names: Vec<&str> =
                    model.params.iter().map(|(_, p)| p.name()).collect();
                CliError::Usage(format!(
                    "--corrupt: this model has no parameter named {name:?} (it has: {})",
                    names.join(", ")
                ))
            })?),
            None => None,
        };

        let meta = model.meta.clone();
        let report = grad_check(
            &mut model.params,
            |set| {
                let mut tape = Tape::new();
                let mut dropout = DropoutCtx::eval();
                let loss = example_loss(&meta, set, &mut tape, &example, &mut dropout)
                    .expect("sampled examples are labeled");
                match corrupt_id {
                    None => (tape, loss),
                    Some(id) => {
                        // Re-enter the parameter's current value as a plain
                        // constant: its contribution to the loss is real,
                        // but the backward sweep cannot see it.
                        let value = set.value(id);
                        let n = value.len();
                        let frozen = tape.constant(Tensor::vector(value.data().to_vec()));
                        let ones = tape.constant(Tensor::matrix(1, n, vec![1.0; n]));
                        let extra = tape.matvec(ones, frozen);
                        let total = tape.add(loss, extra);
                        (tape, total)
                    }
                }
            },
            args.step,
            args.tol,
        )
        .map_err(|e| CliError::Check(format!("seed {seed}: {e}")))?;

        checked += report.params.len();
        skipped += report.nonsmooth_skips;
        let seed_worst = report.worst();
        if seed_worst.max_rel_err > worst.0 {
            worst = (seed_worst.max_rel_err, seed_worst.name.clone(), seed);
        }
        if !report.passed() {
            failed_seeds += 1;
            for p in report.failures() {
                println!(
                    "seed {seed}: FAIL {} rel err {:.3e} (analytic {:.6e}, numeric {:.6e})",
                    p.name, p.max_rel_err, p.analytic, p.numeric
                );
                if !offenders.contains(&p.name) {
                    offenders.push(p.name.clone());
                }
            }
        }
    }

    println!(
        "checked {checked} parameter tensors over {} seeds ({} / {} fusion, task {})",
        args.seeds,
        variant,
        fusion.name(),
        task
    );
    println!(
        "worst relative error: {:.3e} ({}, seed {})",
        worst.0, worst.1, worst.2
    );
    if skipped > 0 {
        println!("skipped {skipped} probe point(s) where the loss is non-smooth");
    }
    if failed_seeds > 0 {
        return Err(CliError::Check(format!(
            "gradient check failed on {failed_seeds} of {} seeds; offending parameters: {}",
            args.seeds,
            offenders.join(", ")
        )));
    }
    println!("gradient check passed (tolerance {:.1e})", args.tol);
    Ok(())
}

fn token_vocab(prefix: &str, n: usize) -> Vocab {
    let mut v = Vocab::new();
    for i in 0..n {
        v.intern(&format!("{prefix}{i}"));
    }
    v
}

fn random_example(rng: &mut ChaCha8Rng, task: Task, num_classes: usize) -> Example {
    match task {
        Task::Classify => {
            let leaves = rng.random_range(2..=6);
            Example::Single {
                tree: random_tree(rng, leaves, num_classes, 0.4),
            }
        }
        Task::Match => {
            let (n1, n2) = (rng.random_range(1..=4), rng.random_range(1..=4));
            Example::Pair {
                first: random_tree(rng, n1, num_classes, 0.0),
                second: random_tree(rng, n2, num_classes, 0.0),
                label: rng.random_range(0..num_classes),
            }
        }
    }
}

/// A random binary tree with exactly `leaves` leaves; every node draws a
/// label with probability `label_prob`, and the root always carries one.
fn random_tree(rng: &mut ChaCha8Rng, leaves: usize, num_classes: usize, label_prob: f64) -> Tree {
    let mut tree = subtree(rng, leaves, num_classes, label_prob);
    if tree.label.is_none() {
        tree.label = Some(rng.random_range(0..num_classes));
    }
    tree
}

fn subtree(rng: &mut ChaCha8Rng, leaves: usize, num_classes: usize, label_prob: f64) -> Tree {
    let tag = rng.random_range(1..=NUM_TAGS);
    let label = (rng.random::<f64>() < label_prob).then(|| rng.random_range(0..num_classes));
    let kind = if leaves == 1 {
        TreeKind::Leaf {
            word: rng.random_range(1..=NUM_WORDS),
        }
    } else {
        let left = rng.random_range(1..leaves);
        TreeKind::Inner {
            left: Box::new(subtree(rng, left, num_classes, label_prob)),
            right: Box::new(subtree(rng, leaves - left, num_classes, label_prob)),
        }
    };
    Tree { tag, label, kind }
}
