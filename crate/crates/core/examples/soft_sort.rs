//! Soft sort of a vector: relaxed permutation matrix, Jacobian and the
//! gradient of a ranking loss.

use monosort::{
    cross_entropy_grad, cross_entropy_loss, forward, hard_rank_perm, NetworkPlan, SigmoidKind,
    SwapConfig,
};

fn main() -> monosort::Result<()> {
    let x = [0.3, -1.2, 2.0, 0.1, 0.9];
    let plan = NetworkPlan::odd_even(x.len())?;
    let cfg = SwapConfig::new(SigmoidKind::Optimal, 4.0)?;
    let result = forward(&x, &plan, &cfg)?;

    println!("x     = {x:?}");
    println!("x_hat = {:.4?}", result.x_hat());
    println!("P =\n{:.3}", result.p());
    println!("d x_hat / d x =\n{:.3}", result.jacobian()?);

    // supervise with an ordering that disagrees with the inputs
    let truth = [5.0, 4.0, 3.0, 2.0, 1.0];
    let q = hard_rank_perm(&truth)?;
    let loss = cross_entropy_loss(result.p(), &q)?;
    let grad_p = cross_entropy_grad(result.p(), &q)?;
    let grad_x = result.backward(&[0.0; 5], Some(grad_p.view()))?;
    println!("loss = {loss:.4}");
    println!("dL/dx = {grad_x:.4?}");
    Ok(())
}
