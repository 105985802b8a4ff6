//! Smooth maps `R^m → R^n` given as expression trees, evaluated with exact
//! first and second directional derivatives by forward-mode dual numbers.

mod dual;
mod parse;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

pub use dual::{Dual, Real};

use crate::error::{DomainErrorKind, ExprError, ParseError};

/// Named parameter values, bound at evaluation time.
pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sqrt,
    Exp,
    Log,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "log" => Func::Log,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    /// 0-based coordinate index.
    Var(usize),
    /// Index into `MapDefinition::params`.
    Param(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval<T: Real>(&self, x: &[T], params: &[f64]) -> Result<T, DomainErrorKind> {
        Ok(match self {
            Expr::Num(v) => T::constant(*v),
            Expr::Var(i) => x[*i],
            Expr::Param(i) => T::constant(params[*i]),
            Expr::Neg(e) => -e.eval(x, params)?,
            Expr::Bin(op, a, b) => {
                let a = a.eval(x, params)?;
                let b = b.eval(x, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.re() == 0.0 {
                            return Err(DomainErrorKind::DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(x, params)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Sqrt => {
                        if a.re() < 0.0 {
                            return Err(DomainErrorKind::SqrtOfNegative);
                        }
                        a.sqrt()
                    }
                    Func::Log => {
                        if a.re() <= 0.0 {
                            return Err(DomainErrorKind::LogOfNonPositive);
                        }
                        a.ln()
                    }
                }
            }
        })
    }
}

/// A parsed map `F: R^m → R^n` with named parameters.
#[derive(Clone, Debug)]
pub struct MapDefinition {
    pub domain_dim: usize,
    pub codomain_dim: usize,
    pub components: Vec<Expr>,
    pub params: Vec<String>,
    pub source: String,
}

/// Value and derivative of `F` along one direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DualVector {
    pub value: Vec<f64>,
    pub derivative: Vec<f64>,
}

impl MapDefinition {
    pub fn parse(text: &str) -> Result<MapDefinition, ParseError> {
        parse::parse_map(text)
    }

    /// Resolves parameter values in declaration order.
    pub fn bind<'a>(&'a self, params: &Params) -> Result<BoundMap<'a>, ExprError> {
        let values = self
            .params
            .iter()
            .map(|name| {
                params
                    .get(name)
                    .copied()
                    .ok_or_else(|| ExprError::UnboundParameter(name.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundMap { map: self, values })
    }

    pub fn eval(&self, point: &[f64], params: &Params) -> Result<Vec<f64>, ExprError> {
        self.bind(params)?.eval(point)
    }

    pub fn jacobian(&self, point: &[f64], params: &Params) -> Result<DMatrix<f64>, ExprError> {
        self.bind(params)?.jacobian(point)
    }

    pub fn directional_second(
        &self,
        point: &[f64],
        params: &Params,
        u: &[f64],
        v: &[f64],
    ) -> Result<Vec<f64>, ExprError> {
        self.bind(params)?.directional_second(point, u, v)
    }
}

/// A map with its parameters resolved; the hot-path evaluator.
#[derive(Clone, Debug)]
pub struct BoundMap<'a> {
    pub map: &'a MapDefinition,
    values: Vec<f64>,
}

impl BoundMap<'_> {
    pub fn domain_dim(&self) -> usize {
        self.map.domain_dim
    }

    pub fn codomain_dim(&self) -> usize {
        self.map.codomain_dim
    }

    fn check_len(&self, what: &'static str, len: usize) -> Result<(), ExprError> {
        if len != self.map.domain_dim {
            return Err(ExprError::WrongLength {
                what,
                expected: self.map.domain_dim,
                found: len,
            });
        }
        Ok(())
    }

    fn eval_all<T: Real>(&self, x: &[T]) -> Result<Vec<T>, ExprError> {
        self.map
            .components
            .iter()
            .enumerate()
            .map(|(k, e)| {
                e.eval(x, &self.values)
                    .map_err(|kind| ExprError::Domain { component: k + 1, kind })
            })
            .collect()
    }

    pub fn eval(&self, point: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.check_len("point", point.len())?;
        self.eval_all(point)
    }

    /// `F(p)` and `DF(p)·direction` in one pass.
    pub fn eval_directional(&self, point: &[f64], direction: &[f64]) -> Result<DualVector, ExprError> {
        self.check_len("point", point.len())?;
        self.check_len("direction", direction.len())?;
        let x: Vec<Dual<f64>> = point
            .iter()
            .zip(direction)
            .map(|(&p, &d)| Dual::new(p, d))
            .collect();
        let out = self.eval_all(&x)?;
        Ok(DualVector {
            value: out.iter().map(|d| d.re).collect(),
            derivative: out.iter().map(|d| d.eps).collect(),
        })
    }

    /// `n×m` Jacobian, one forward pass per coordinate direction.
    pub fn jacobian(&self, point: &[f64]) -> Result<DMatrix<f64>, ExprError> {
        self.check_len("point", point.len())?;
        let m = self.map.domain_dim;
        let n = self.map.codomain_dim;
        let mut jac = DMatrix::zeros(n, m);
        let mut x: Vec<Dual<f64>> = point.iter().map(|&p| Dual::new(p, 0.0)).collect();
        for j in 0..m {
            x[j].eps = 1.0;
            let col = self.eval_all(&x)?;
            for (i, d) in col.iter().enumerate() {
                jac[(i, j)] = d.eps;
            }
            x[j].eps = 0.0;
        }
        Ok(jac)
    }

    /// `D²F(p)[u, v]` via nested duals.
    pub fn directional_second(&self, point: &[f64], u: &[f64], v: &[f64]) -> Result<Vec<f64>, ExprError> {
        self.check_len("point", point.len())?;
        self.check_len("direction", u.len())?;
        self.check_len("direction", v.len())?;
        if u.iter().all(|&c| c == 0.0) || v.iter().all(|&c| c == 0.0) {
            return Err(ExprError::ZeroDirection);
        }
        let x: Vec<Dual<Dual<f64>>> = (0..point.len())
            .map(|i| Dual::new(Dual::new(point[i], v[i]), Dual::new(u[i], 0.0)))
            .collect();
        Ok(self.eval_all(&x)?.iter().map(|d| d.eps.eps).collect())
    }

    /// `D²F(p)[u, v]` as a vector, allowing zero directions.
    pub fn hessian_form(&self, point: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>, ExprError> {
        if u.iter().all(|&c| c == 0.0) || v.iter().all(|&c| c == 0.0) {
            return Ok(DVector::zeros(self.map.codomain_dim));
        }
        Ok(DVector::from_vec(self.directional_second(point, u.as_slice(), v.as_slice())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_6;

    const EX43: &str = "domain 6\ncodomain 4\nparam alpha\nF1 = x1\nF2 = sin(alpha)*x3 - cos(alpha)*x5\nF3 = x6\nF4 = x2\n";
    const RADIAL: &str = "domain 4\ncodomain 1\nF1 = sqrt(x1*x1 + x2*x2 + x3*x3 + x4*x4)\n";

    fn alpha(a: f64) -> Params {
        Params::from([("alpha".to_string(), a)])
    }

    #[test]
    fn parses_the_six_to_four_example() {
        let map = MapDefinition::parse(EX43).unwrap();
        assert_eq!((map.domain_dim, map.codomain_dim), (6, 4));
        assert_eq!(map.params, vec!["alpha".to_string()]);
    }

    #[test]
    fn evaluates_the_six_to_four_example() {
        let map = MapDefinition::parse(EX43).unwrap();
        let y = map.eval(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &alpha(FRAC_PI_6)).unwrap();
        assert_relative_eq!(y[0], 1.0);
        assert_relative_eq!(y[1], 3.0 * 0.5 - 5.0 * 3f64.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(y[2], 6.0);
        assert_relative_eq!(y[3], 2.0);
    }

    #[test]
    fn identity_map() {
        let map = MapDefinition::parse("domain 1\ncodomain 1\nF1 = x1").unwrap();
        assert_eq!(map.eval(&[0.25], &Params::new()).unwrap(), vec![0.25]);
        assert_eq!(map.jacobian(&[0.25], &Params::new()).unwrap(), DMatrix::identity(1, 1));
    }

    #[test]
    fn radial_value_and_gradient() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        let p = Params::new();
        assert_relative_eq!(map.eval(&[3.0, 0.0, 4.0, 0.0], &p).unwrap()[0], 5.0);
        let jac = map.jacobian(&[1.0, 0.0, 0.0, 0.0], &p).unwrap();
        assert_eq!(jac.as_slice(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn radial_second_derivative_across_the_sphere() {
        // d²/dt² sqrt(1 + t²) at t = 0 is 1
        let map = MapDefinition::parse(RADIAL).unwrap();
        let e2 = [0.0, 1.0, 0.0, 0.0];
        let d2 = map
            .directional_second(&[1.0, 0.0, 0.0, 0.0], &Params::new(), &e2, &e2)
            .unwrap();
        assert_relative_eq!(d2[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn affine_map_has_zero_second_derivative() {
        let map = MapDefinition::parse(EX43).unwrap();
        let u = [0.3, -1.0, 2.0, 0.1, 0.0, 5.0];
        let v = [1.0, 1.0, -1.0, 0.5, 2.0, 0.0];
        let d2 = map.directional_second(&[0.4; 6], &alpha(0.7), &u, &v).unwrap();
        assert!(d2.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn unbound_parameter() {
        let map = MapDefinition::parse(EX43).unwrap();
        assert!(matches!(
            map.eval(&[0.0; 6], &Params::new()),
            Err(ExprError::UnboundParameter(name)) if name == "alpha"
        ));
    }

    #[test]
    fn domain_errors_name_the_component() {
        let map = MapDefinition::parse("domain 2\ncodomain 2\nF1 = x1\nF2 = log(x2)").unwrap();
        assert!(matches!(
            map.eval(&[1.0, -1.0], &Params::new()),
            Err(ExprError::Domain { component: 2, kind: DomainErrorKind::LogOfNonPositive })
        ));
        let map = MapDefinition::parse("domain 1\ncodomain 1\nF1 = 1/x1").unwrap();
        assert!(matches!(
            map.jacobian(&[0.0], &Params::new()),
            Err(ExprError::Domain { component: 1, kind: DomainErrorKind::DivisionByZero })
        ));
        let map = MapDefinition::parse("domain 1\ncodomain 1\nF1 = sqrt(x1)").unwrap();
        assert!(matches!(
            map.eval(&[-1.0], &Params::new()),
            Err(ExprError::Domain { component: 1, kind: DomainErrorKind::SqrtOfNegative })
        ));
    }

    #[test]
    fn wrong_point_length() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        assert!(matches!(map.eval(&[1.0], &Params::new()), Err(ExprError::WrongLength { .. })));
    }

    #[test]
    fn zero_direction_is_rejected() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        let z = [0.0; 4];
        assert!(matches!(
            map.directional_second(&[1.0, 0.0, 0.0, 0.0], &Params::new(), &z, &z),
            Err(ExprError::ZeroDirection)
        ));
    }

    #[test]
    fn directional_pass_matches_jacobian() {
        let map = MapDefinition::parse(RADIAL).unwrap();
        let bound = map.bind(&Params::new()).unwrap();
        let p = [0.3, -0.7, 1.1, 0.2];
        let d = [1.0, 2.0, -0.5, 0.25];
        let dv = bound.eval_directional(&p, &d).unwrap();
        let jac = bound.jacobian(&p).unwrap();
        let jd = &jac * DVector::from_column_slice(&d);
        assert_relative_eq!(dv.derivative[0], jd[0], epsilon = 1e-14);
        assert_eq!(dv.value, bound.eval(&p).unwrap());
    }
}
