// How EPLS turns layer outputs into sparse targets.
//
// Each row gets exactly one active output (population sparsity). Every
// pick raises that output's inhibitor by `N_h / N`, so an output that keeps
// responding strongly is pushed aside in favour of the others (lifetime
// sparsity).

use featlearn::epls::{build_target, epls_loss, Inhibitor};
use featlearn::Nonlinearity;
use ndarray::array;

pub fn run() -> featlearn::Result<()> {
    // output 0 is the strongest response in every row
    let h = array![
        [0.9, 0.5, 0.1],
        [0.8, 0.4, 0.2],
        [0.9, 0.3, 0.3],
        [0.7, 0.6, 0.1],
        [0.9, 0.2, 0.4],
        [0.8, 0.5, 0.3],
    ];
    let mut inhibitor = Inhibitor::new(3, h.nrows())?;
    let target = build_target(h.view(), &mut inhibitor, Nonlinearity::Logistic)?;
    println!("winners per row: {:?}", target.winners());
    println!("selections:      {:?}", inhibitor.counts());
    println!("inhibitor:       {:?}", inhibitor.values());
    println!("loss ‖H − T‖²:   {:.3}", epls_loss(h.view(), &target)?);

    // without the inhibitor every row would have gone to output 0
    assert!(inhibitor.counts().iter().all(|&c| c > 0));
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
