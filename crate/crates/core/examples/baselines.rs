//! Analytic and Monte-Carlo random baselines for the two benchmark-shaped
//! synthetic datasets.

use relprobe::metrics::{monte_carlo_baseline, random_baseline};
use relprobe::synthetic::{bear_big_shapes, bear_shapes, shaped_dataset};

fn main() -> relprobe::Result<()> {
    for (name, shapes) in [("bear-shaped", bear_shapes()), ("bear-big-shaped", bear_big_shapes())] {
        let d = shaped_dataset(name, &shapes, 1);
        let a = random_baseline(&d)?;
        let mc = monte_carlo_baseline(&d, 200_000, 1)?;
        println!("{name} ({} instances)", d.instance_count());
        println!("  overall {:.2}%  mc {:.2}% ± {:.2}", 100.0 * a.overall, 100.0 * mc.overall.mean, 100.0 * mc.overall.stderr);
        if let (Some(a), Some(m)) = (a.one_to_one, mc.one_to_one) {
            println!("  1:1     {:.2}%  mc {:.2}% ± {:.2}", 100.0 * a, 100.0 * m.mean, 100.0 * m.stderr);
        }
        if let (Some(a), Some(m)) = (a.n_to_one, mc.n_to_one) {
            println!("  N:1     {:.2}%  mc {:.2}% ± {:.2}", 100.0 * a, 100.0 * m.mean, 100.0 * m.stderr);
        }
    }
    Ok(())
}
