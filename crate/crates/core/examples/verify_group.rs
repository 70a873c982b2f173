//! Group identities of the twinborn pulses and the closure table of {I, h1, h2}.

use lambda_decouple::algebra::{
    decomposition_residual, sigma_op, symmetrize, verify_group_closure, Axis, BbElement, DecouplingGroup, LevelPair,
};

fn main() {
    let group = DecouplingGroup::lambda();
    for pair in [LevelPair::P20, LevelPair::P21] {
        let r = symmetrize(&sigma_op(Axis::Z, pair), &group).max_norm();
        println!("Pi_G(sigma_z({},{})) max entry: {r:e}", pair.upper(), pair.lower());
    }
    for e in [BbElement::H1, BbElement::H2] {
        println!("{} from two pi pulses, residual {:e}", e.label(), decomposition_residual(e));
    }
    print!("{}", verify_group_closure(&group).render(&["I", "h1", "h2"]));
    println!("h1 =\n{}", BbElement::H1.operator().dump());
}
