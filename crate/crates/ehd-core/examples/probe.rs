use ehd_core::energy::discrete_energy;
use ehd_core::geom::Vec2;
use ehd_core::minimize::{minimize, BoundaryData, DomainSpec, InitKind, MinimizeParams};
use ehd_core::profiles::PiecewiseProfile;
use ehd_core::weiss::{density_at_radius, DensityPhase, WeissOpts};

fn main() {
    let n = 128;
    let wo = WeissOpts::default();
    for (name, prof) in [
        ("A4R", PiecewiseProfile::a4_right()),
        ("A4L", PiecewiseProfile::a4_left()),
        ("A2", PiecewiseProfile::a2()),
    ] {
        let domain = DomainSpec::square_centered(1.0, n, 0.0);
        let h = domain.h;
        let mut params = MinimizeParams::default_for(h);
        params.seed = 1;
        params.init = InitKind::Profile(prof.clone());
        params.eps_schedule = vec![4.0 * h * h, h * h];
        let r = minimize(&domain, &BoundaryData::Catalog(prof.clone()), &params).unwrap();
        print!("{name}: E={:.6} dens:", discrete_energy(&r.field));
        for rr in [0.5, 0.35, 0.25, 0.18] {
            let d = density_at_radius(&r.field, Vec2::ZERO, rr, DensityPhase::Negative, &wo).unwrap();
            print!(" {d:.4}");
        }
        println!(" conv={}", r.converged);
    }
}
