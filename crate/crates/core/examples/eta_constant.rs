//! The Gaussian tail constant eta(rho) against its grid oracle and closed form.

use ostail::oracles::grid_max_min;
use ostail::{eta, eta_closed_form};

fn main() -> ostail::Result<()> {
    for rho in [-0.9, -0.5, 0.0, 0.3, 0.5, 0.9, 0.99] {
        println!("rho = {rho:>5}: eta = {:.9}, grid {:.9}, closed form {:.9}", eta(rho)?, grid_max_min(rho)?, eta_closed_form(rho)?);
    }
    Ok(())
}
