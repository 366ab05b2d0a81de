//! Values, slopes and Lipschitz constants of every sigmoid.

use monosort::{SigmoidKind, SigmoidSpec};

fn main() -> monosort::Result<()> {
    let zs = [-4.0, -1.0, -0.25, 0.0, 0.25, 1.0, 4.0];
    print!("{:<14}", "z");
    for z in zs {
        print!("{z:>9}");
    }
    println!("{:>10}", "lipschitz");
    for kind in SigmoidKind::ALL {
        let s = SigmoidSpec::new(kind);
        print!("{:<14}", kind.name());
        for z in zs {
            print!("{:>9.5}", s.eval(z)?);
        }
        match s.lipschitz_constant() {
            Ok(l) => println!("{l:>10.5}"),
            Err(_) => println!("{:>10}", "-"),
        }
    }
    println!();
    println!("slope at z = 100 (times z^2):");
    for kind in SigmoidKind::ALL {
        let s = SigmoidSpec::new(kind);
        println!("  {:<14}{:.3e}", kind.name(), s.deriv(100.0)? * 1e4);
    }
    Ok(())
}
