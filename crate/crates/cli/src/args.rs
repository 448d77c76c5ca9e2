//! Parsers for the comma-separated values taken on the command line.
//!
//! Angles are given in degrees and converted to radians here.

use prr_core::{JointVector, Pose, Twist};

fn numbers<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got `{s}`"));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("`{part}` is not a finite number"))?;
    }
    Ok(out)
}

/// `x,y,theta` with theta in degrees.
pub fn pose(s: &str) -> Result<Pose, String> {
    let [x, y, theta] = numbers::<3>(s)?;
    Ok(Pose::new(x, y, theta.to_radians()))
}

pub fn joints(s: &str) -> Result<JointVector, String> {
    numbers::<3>(s).map(JointVector)
}

/// `NxM` grid resolution.
pub fn resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected NxM, got `{s}`"))?;
    let parse = |v: &str| {
        v.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{v}` is not a grid size"))
    };
    Ok((parse(a)?, parse(b)?))
}

pub fn list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("`{p}` is not a finite number"))
        })
        .collect()
}

/// Rate law specification: `horizontal:V`, `vertical:V`, `rotation:W` or
/// `twist:VX,VY,W`, with angular rates in degrees per time unit.
pub fn law(s: &str) -> Result<prr_core::motion::RateLaw, String> {
    use prr_core::motion::RateLaw;
    let (kind, value) = s
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:VALUE, got `{s}`"))?;
    let scalar = || numbers::<1>(value).map(|[v]| v);
    match kind.trim() {
        "horizontal" => scalar().map(RateLaw::Horizontal),
        "vertical" => scalar().map(RateLaw::Vertical),
        "rotation" => scalar().map(|w| RateLaw::Rotation(w.to_radians())),
        "twist" => numbers::<3>(value)
            .map(|[vx, vy, w]| RateLaw::GeneralTwist(Twist::new(vx, vy, w.to_radians()))),
        other => Err(format!(
            "unknown law `{other}` (expected horizontal, vertical, rotation or twist)"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use prr_core::motion::RateLaw;

    #[test]
    fn pose_in_degrees() {
        let p = pose("20, 20, 90").unwrap();
        assert_eq!((p.x, p.y), (20.0, 20.0));
        assert!((p.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(pose("1,2").is_err());
        assert!(pose("1,2,nan").is_err());
    }

    #[test]
    fn resolution_and_lists() {
        assert_eq!(resolution("200x150").unwrap(), (200, 150));
        assert!(resolution("200").is_err());
        assert_eq!(list("1,1.5, 2").unwrap(), vec![1.0, 1.5, 2.0]);
    }

    #[test]
    fn laws() {
        assert_eq!(law("horizontal:0.5").unwrap(), RateLaw::Horizontal(0.5));
        assert_eq!(
            law("rotation:180").unwrap(),
            RateLaw::Rotation(std::f64::consts::PI)
        );
        assert!(matches!(
            law("twist:1,0,0").unwrap(),
            RateLaw::GeneralTwist(_)
        ));
        assert!(law("spin:1").is_err());
    }
}
