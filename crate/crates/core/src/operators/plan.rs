use num_rational::Ratio;

use crate::error::{Error, Result};

/// Which relaxation occupies a slot of a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelaxSlot {
    /// An `R_{omega=2}` slot; the relaxation mode decides what runs there.
    Reflection,
    /// `R_{omega=1}`, always applied as a projection on equilibrium.
    Projection,
}

/// Primitive operation, in application order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    /// Shift every velocity block `k` by `cells * e_k`.
    Transport(i64),
    Relax(RelaxSlot),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    I,
    II,
    III,
    IV,
    BaselineA,
    BaselineB,
    Fair2nd,
}

impl Variant {
    /// Cell travel per macro-step, in units of `kappa`; `dt = travel * kappa * dx / V`.
    pub fn travel_per_step(self) -> i64 {
        match self {
            Variant::I | Variant::II | Variant::III | Variant::IV | Variant::Fair2nd => 24,
            Variant::BaselineA => 1,
            Variant::BaselineB => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::I => "I",
            Variant::II => "II",
            Variant::III => "III",
            Variant::IV => "IV",
            Variant::BaselineA => "baseline-A",
            Variant::BaselineB => "baseline-B",
            Variant::Fair2nd => "fair-2nd",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Variant::I,
            "ii" | "2" => Variant::II,
            "iii" | "3" => Variant::III,
            "iv" | "4" => Variant::IV,
            "baseline-a" | "a" => Variant::BaselineA,
            "baseline-b" | "b" => Variant::BaselineB,
            "fair-2nd" | "fair2nd" | "second-order" => Variant::Fair2nd,
            other => return Err(Error::Config(format!("unknown scheme variant '{other}'"))),
        })
    }
}

/// Palindromic composition `psi(alpha h)^n psi(beta h) psi(alpha h)^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Composition {
    pub n: i64,
    pub alpha: Ratio<i64>,
    pub beta: Ratio<i64>,
}

impl Composition {
    pub fn fourth_order() -> Self {
        Self { n: 4, alpha: Ratio::new(1, 6), beta: Ratio::new(-1, 3) }
    }

    /// `2 n alpha + beta`, which must equal one.
    pub fn consistency(&self) -> Ratio<i64> {
        Ratio::from_integer(2 * self.n) * self.alpha + self.beta
    }

    /// `2 n alpha^3 + beta^3`, which must vanish.
    pub fn third_moment(&self) -> Ratio<i64> {
        let cube = |r: Ratio<i64>| r * r * r;
        Ratio::from_integer(2 * self.n) * cube(self.alpha) + cube(self.beta)
    }

    pub fn check(&self) -> Result<()> {
        if self.consistency() != Ratio::from_integer(1) || self.third_moment() != Ratio::from_integer(0) {
            return Err(Error::Config(format!(
                "composition (n, alpha, beta) = ({}, {}, {}) violates the order conditions",
                self.n, self.alpha, self.beta
            )));
        }
        Ok(())
    }

    /// Quarter-brick shift of a sub-step of weight `w`, with `travel` cells
    /// per macro-step and four quarter shifts per brick.
    fn quarter(w: Ratio<i64>, travel: i64) -> Result<i64> {
        let cells = w * Ratio::from_integer(travel) / Ratio::from_integer(4);
        if !cells.is_integer() {
            return Err(Error::Config(format!("sub-step weight {w} gives a fractional shift {cells}")));
        }
        Ok(cells.to_integer())
    }

    /// `(alpha, beta)` quarter shifts in units of `kappa`.
    pub fn quarter_shifts(&self, travel: i64) -> Result<(i64, i64)> {
        self.check()?;
        Ok((Self::quarter(self.alpha, travel)?, Self::quarter(self.beta, travel)?))
    }
}

/// Ordered primitive actions of one macro-step, all shifts in cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepPlan {
    pub actions: Vec<Action>,
}

fn brick(out: &mut Vec<Action>, q: i64) {
    out.extend_from_slice(&[
        Action::Transport(q),
        Action::Relax(RelaxSlot::Reflection),
        Action::Transport(2 * q),
        Action::Relax(RelaxSlot::Reflection),
        Action::Transport(q),
    ]);
}

/// `R1 T R2 T R1 T R2 T`, rightmost first.
fn projected_brick(out: &mut Vec<Action>, q: i64) {
    for _ in 0..2 {
        out.extend_from_slice(&[
            Action::Transport(q),
            Action::Relax(RelaxSlot::Reflection),
            Action::Transport(q),
            Action::Relax(RelaxSlot::Projection),
        ]);
    }
}

impl StepPlan {
    pub fn new(variant: Variant, kappa: i64) -> Result<Self> {
        if kappa < 1 {
            return Err(Error::Config(format!("kappa must be a positive integer, got {kappa}")));
        }
        let mut a = Vec::new();
        match variant {
            Variant::I | Variant::II | Variant::III | Variant::IV => {
                let comp = Composition::fourth_order();
                let (qa, qb) = comp.quarter_shifts(variant.travel_per_step())?;
                let push = |a: &mut Vec<Action>, q: i64| {
                    if variant == Variant::IV {
                        projected_brick(a, q * kappa);
                    } else {
                        brick(a, q * kappa);
                    }
                    if variant == Variant::III {
                        a.push(Action::Relax(RelaxSlot::Projection));
                    }
                };
                for _ in 0..comp.n {
                    push(&mut a, qa);
                }
                push(&mut a, qb);
                for _ in 0..comp.n {
                    push(&mut a, qa);
                }
                if variant == Variant::II {
                    a.push(Action::Relax(RelaxSlot::Projection));
                }
            }
            Variant::BaselineA => {
                a.push(Action::Transport(kappa));
                a.push(Action::Relax(RelaxSlot::Reflection));
            }
            Variant::BaselineB => {
                a.extend_from_slice(&[
                    Action::Transport(kappa),
                    Action::Relax(RelaxSlot::Reflection),
                    Action::Transport(2 * kappa),
                    Action::Relax(RelaxSlot::Reflection),
                    Action::Transport(kappa),
                    Action::Relax(RelaxSlot::Projection),
                ]);
            }
            Variant::Fair2nd => {
                for _ in 0..24 {
                    a.push(Action::Transport(kappa));
                    a.push(Action::Relax(RelaxSlot::Reflection));
                }
            }
        }
        Ok(Self { actions: a })
    }

    /// Plan of a single brick with quarter shift `q` cells.
    pub fn brick(q: i64) -> Self {
        let mut a = Vec::new();
        brick(&mut a, q);
        Self { actions: a }
    }

    pub fn forward_travel(&self) -> i64 {
        self.shifts().filter(|&c| c > 0).sum()
    }

    pub fn backward_travel(&self) -> i64 {
        -self.shifts().filter(|&c| c < 0).sum::<i64>()
    }

    pub fn max_shift(&self) -> i64 {
        self.shifts().map(i64::abs).max().unwrap_or(0)
    }

    pub fn count(&self, slot: RelaxSlot) -> usize {
        self.actions.iter().filter(|a| **a == Action::Relax(slot)).count()
    }

    fn shifts(&self) -> impl Iterator<Item = i64> + '_ {
        self.actions.iter().filter_map(|a| match a {
            Action::Transport(c) => Some(*c),
            Action::Relax(_) => None,
        })
    }
}
