//! Channel synthesis: steering vectors, THz path gains, the rank-one BS–IRS
//! link, sparse multipath IRS–user links, the optional direct BS–Eve link and
//! beam blocking.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::uniform_phase;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Molecular absorption coefficient at 0.3 THz, 1/m.
pub const DEFAULT_ABSORPTION_300GHZ: f64 = 0.0033;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrayKind {
    Ula,
    Ura { rows: usize, cols: usize },
}

/// Antenna or reflecting-element array layout. Spacing is in wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    kind: ArrayKind,
    num_elements: usize,
    spacing: f64,
}

impl ArrayGeometry {
    pub fn ula(num_elements: usize, spacing: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        check_spacing(spacing)?;
        Ok(Self {
            kind: ArrayKind::Ula,
            num_elements,
            spacing,
        })
    }

    pub fn ura(rows: usize, cols: usize, spacing: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidGeometry("URA needs rows, cols >= 1".into()));
        }
        check_spacing(spacing)?;
        Ok(Self {
            kind: ArrayKind::Ura { rows, cols },
            num_elements: rows * cols,
            spacing,
        })
    }

    /// Near-square URA with `num_elements` elements: rows is the largest
    /// divisor not exceeding the square root.
    pub fn square_ura(num_elements: usize, spacing: f64) -> Result<Self> {
        if num_elements == 0 {
            return Err(Error::InvalidGeometry("array needs at least one element".into()));
        }
        let mut rows = (num_elements as f64).sqrt().floor() as usize;
        while !num_elements.is_multiple_of(rows) {
            rows -= 1;
        }
        Self::ura(rows, num_elements / rows, spacing)
    }

    pub fn kind(&self) -> ArrayKind {
        self.kind
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

fn check_spacing(spacing: f64) -> Result<()> {
    if spacing.is_finite() && spacing > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidGeometry(format!("element spacing must be > 0, got {spacing}")))
    }
}

/// ULA response, entry m = exp(j 2π d m sin(angle)) / √M.
pub fn steering_ula(geometry: &ArrayGeometry, angle: f64) -> Result<CVector> {
    if geometry.kind != ArrayKind::Ula {
        return Err(Error::GeometryMismatch { expected: "ULA" });
    }
    let m = geometry.num_elements;
    let amp = 1.0 / (m as f64).sqrt();
    let k = TAU * geometry.spacing * angle.sin();
    Ok(CVector::from_fn(m, |i, _| {
        Complex64::from_polar(amp, k * i as f64)
    }))
}

/// URA response over a rows×cols grid stored row-major (index r·cols + c).
///
/// The phase of element (r, c) is 2π d (r sin(az) cos(el) + c sin(el)), so the
/// vector is the Kronecker product of two ULA-like factors.
pub fn steering_ura(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> Result<CVector> {
    let ArrayKind::Ura { rows, cols } = geometry.kind else {
        return Err(Error::GeometryMismatch { expected: "URA" });
    };
    let n = geometry.num_elements;
    let amp = 1.0 / (n as f64).sqrt();
    let u = TAU * geometry.spacing * azimuth.sin() * elevation.cos();
    let v = TAU * geometry.spacing * elevation.sin();
    Ok(CVector::from_fn(n, |idx, _| {
        let (r, c) = (idx / cols, idx % cols);
        debug_assert!(r < rows);
        Complex64::from_polar(amp, u * r as f64 + v * c as f64)
    }))
}

fn steering(geometry: &ArrayGeometry, azimuth: f64, elevation: f64) -> CVector {
    match geometry.kind {
        ArrayKind::Ula => steering_ula(geometry, azimuth),
        ArrayKind::Ura { .. } => steering_ura(geometry, azimuth, elevation),
    }
    .expect("kind dispatched above")
}

/// Free-space spreading plus molecular absorption, antenna gains in dBi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGainModel {
    pub carrier_frequency: f64,
    pub absorption_coefficient: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
}

impl Default for PathGainModel {
    fn default() -> Self {
        Self {
            carrier_frequency: 0.3e12,
            absorption_coefficient: DEFAULT_ABSORPTION_300GHZ,
            tx_gain_dbi: 12.0,
            rx_gain_dbi: 12.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl PathGainModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency.is_finite() && self.carrier_frequency > 0.0) {
            return Err(Error::Domain(format!(
                "carrier frequency must be > 0, got {}",
                self.carrier_frequency
            )));
        }
        if !(self.absorption_coefficient.is_finite() && self.absorption_coefficient >= 0.0) {
            return Err(Error::Domain(format!(
                "absorption coefficient must be >= 0, got {}",
                self.absorption_coefficient
            )));
        }
        Ok(())
    }

    pub fn tx_gain(&self) -> f64 {
        db_to_linear(self.tx_gain_dbi)
    }

    pub fn rx_gain(&self) -> f64 {
        db_to_linear(self.rx_gain_dbi)
    }

    /// |α| = c / (4π f d) · exp(−k d / 2).
    pub fn gain_magnitude(&self, distance: f64) -> Result<f64> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(Error::Domain(format!("distance must be > 0, got {distance}")));
        }
        let spreading = SPEED_OF_LIGHT / (4.0 * PI * self.carrier_frequency * distance);
        Ok(spreading * (-0.5 * self.absorption_coefficient * distance).exp())
    }
}

/// Complex path gain with the model magnitude and a uniform random phase.
pub fn path_gain<R: Rng + ?Sized>(model: &PathGainModel, distance: f64, rng: &mut R) -> Result<Complex64> {
    let mag = model.gain_magnitude(distance)?;
    Ok(Complex64::from_polar(mag, uniform_phase(rng)))
}

/// LoS BS–IRS link, H_BIᴴ = gain · a bᴴ.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneChannel {
    pub gain: Complex64,
    pub irs_steering: CVector,
    pub bs_steering: CVector,
}

impl RankOneChannel {
    pub fn num_irs(&self) -> usize {
        self.irs_steering.len()
    }

    pub fn num_bs(&self) -> usize {
        self.bs_steering.len()
    }

    /// The N×M matrix H_BIᴴ.
    pub fn matrix(&self) -> CMatrix {
        &self.irs_steering * self.bs_steering.adjoint() * self.gain
    }

    /// H_BIᴴ w without forming the matrix.
    pub fn apply(&self, w: &CVector) -> CVector {
        let bw = self.bs_steering.dotc(w);
        &self.irs_steering * (self.gain * bw)
    }
}

/// One propagation path: contribution = weight · alpha · steering.
#[derive(Debug, Clone, PartialEq)]
pub struct PathComponent {
    pub alpha: Complex64,
    pub weight: f64,
    pub steering: CVector,
}

/// Sparse multipath vector channel built from its stored paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathChannel {
    pub vector: CVector,
    pub paths: Vec<PathComponent>,
}

impl MultipathChannel {
    fn from_paths(dim: usize, paths: Vec<PathComponent>) -> Self {
        let mut ch = Self {
            vector: CVector::zeros(dim),
            paths,
        };
        ch.vector = ch.resum();
        ch
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn per_path_gains(&self) -> Vec<Complex64> {
        self.paths.iter().map(|p| p.alpha).collect()
    }

    /// Recomputes the channel vector from the stored paths.
    pub fn resum(&self) -> CVector {
        self.paths.iter().fold(CVector::zeros(self.vector.len()), |acc, p| {
            acc + &p.steering * (p.alpha * p.weight)
        })
    }

    fn scaled(&self, factor: f64) -> Self {
        let paths = self
            .paths
            .iter()
            .map(|p| PathComponent {
                weight: p.weight * factor,
                ..p.clone()
            })
            .collect();
        Self::from_paths(self.vector.len(), paths)
    }

    fn merged(&self, other: &Self) -> Self {
        let paths = self.paths.iter().chain(&other.paths).cloned().collect();
        Self::from_paths(self.vector.len(), paths)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BlockingTarget {
    #[default]
    None,
    IrsBeam,
    BsBeam,
}

/// Where the eavesdropper listens: in the IRS reflection or next to the BS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EveSite {
    #[default]
    Irs,
    Bs,
}

/// Distances (m) and LoS angles (rad) of one deployment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioGeometry {
    pub d_sr: f64,
    pub d_rd: f64,
    pub d_re: f64,
    pub d_se: f64,
    pub bs_departure: f64,
    pub irs_arrival_azimuth: f64,
    pub irs_arrival_elevation: f64,
    pub eve_site: EveSite,
    pub blocking_fraction: f64,
    pub blocking_target: BlockingTarget,
}

impl Default for ScenarioGeometry {
    fn default() -> Self {
        Self {
            d_sr: 5.0,
            d_rd: 5.0,
            d_re: 5.0,
            d_se: 5.0,
            bs_departure: 30f64.to_radians(),
            irs_arrival_azimuth: 20f64.to_radians(),
            irs_arrival_elevation: 10f64.to_radians(),
            eve_site: EveSite::Irs,
            blocking_fraction: 0.0,
            blocking_target: BlockingTarget::None,
        }
    }
}

impl ScenarioGeometry {
    pub fn validate(&self) -> Result<()> {
        for (name, d) in [
            ("d_sr", self.d_sr),
            ("d_rd", self.d_rd),
            ("d_re", self.d_re),
            ("d_se", self.d_se),
        ] {
            if !(d.is_finite() && d > 0.0) {
                return Err(Error::Domain(format!("{name} must be > 0, got {d}")));
            }
        }
        check_rho(self.blocking_fraction)?;
        match (self.blocking_target, self.eve_site) {
            (BlockingTarget::IrsBeam, EveSite::Bs) | (BlockingTarget::BsBeam, EveSite::Irs) => {
                Err(Error::Config(
                    "blocking target must be the beam the eavesdropper sits in".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Domain(format!("blocking fraction must lie in [0, 1], got {rho}")))
    }
}

/// All channels of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub bs_irs: RankOneChannel,
    pub irs_bob: MultipathChannel,
    /// IRS→Eve, present when Eve listens to the IRS reflection.
    pub irs_eve: Option<MultipathChannel>,
    /// Direct BS→Eve (M-vector, Eve receives hᴴw), present when Eve sits near the BS.
    pub bs_eve: Option<MultipathChannel>,
}

impl ChannelSet {
    pub fn num_irs(&self) -> usize {
        self.bs_irs.num_irs()
    }

    pub fn num_bs(&self) -> usize {
        self.bs_irs.num_bs()
    }
}

pub fn build_bs_irs_channel<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry_bs: &ArrayGeometry,
    geometry_irs: &ArrayGeometry,
    scenario: &ScenarioGeometry,
    rng: &mut R,
) -> Result<RankOneChannel> {
    let alpha = path_gain(model, scenario.d_sr, rng)?;
    let m = geometry_bs.num_elements() as f64;
    let n = geometry_irs.num_elements() as f64;
    let gain = alpha * ((m * n).sqrt() * model.rx_gain() * model.tx_gain());
    Ok(RankOneChannel {
        gain,
        irs_steering: steering(
            geometry_irs,
            scenario.irs_arrival_azimuth,
            scenario.irs_arrival_elevation,
        ),
        bs_steering: steering(geometry_bs, scenario.bs_departure, 0.0),
    })
}

fn build_multipath<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry: &ArrayGeometry,
    distance: f64,
    num_paths: usize,
    rng: &mut R,
) -> Result<MultipathChannel> {
    if num_paths == 0 {
        return Err(Error::Domain("number of paths must be >= 1".into()));
    }
    let n = geometry.num_elements();
    let weight = (n as f64 / num_paths as f64).sqrt() * model.rx_gain() * model.tx_gain();
    let mut paths = Vec::with_capacity(num_paths);
    for _ in 0..num_paths {
        let alpha = path_gain(model, distance, rng)?;
        let azimuth = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
        let elevation = match geometry.kind() {
            ArrayKind::Ula => 0.0,
            ArrayKind::Ura { .. } => rng.random_range(-FRAC_PI_4..FRAC_PI_4),
        };
        paths.push(PathComponent {
            alpha,
            weight,
            steering: steering(geometry, azimuth, elevation),
        });
    }
    Ok(MultipathChannel::from_paths(n, paths))
}

/// IRS→user channel: √(N/L) Σᵢ αᵢ G_r G_I a_i at the IRS–Bob distance.
/// Use [`build_irs_eve_channel`] for the eavesdropper link.
pub fn build_irs_user_channel<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry_irs: &ArrayGeometry,
    scenario: &ScenarioGeometry,
    num_paths: usize,
    rng: &mut R,
) -> Result<MultipathChannel> {
    build_multipath(model, geometry_irs, scenario.d_rd, num_paths, rng)
}

pub fn build_irs_eve_channel<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry_irs: &ArrayGeometry,
    scenario: &ScenarioGeometry,
    num_paths: usize,
    rng: &mut R,
) -> Result<MultipathChannel> {
    build_multipath(model, geometry_irs, scenario.d_re, num_paths, rng)
}

pub fn build_direct_bs_eve_channel<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry_bs: &ArrayGeometry,
    scenario: &ScenarioGeometry,
    num_paths: usize,
    rng: &mut R,
) -> Result<MultipathChannel> {
    if geometry_bs.kind() != ArrayKind::Ula {
        return Err(Error::GeometryMismatch { expected: "ULA" });
    }
    build_multipath(model, geometry_bs, scenario.d_se, num_paths, rng)
}

/// Synthesizes every link of a trial in a fixed draw order, then applies blocking.
pub fn build_channel_set<R: Rng + ?Sized>(
    model: &PathGainModel,
    geometry_bs: &ArrayGeometry,
    geometry_irs: &ArrayGeometry,
    scenario: &ScenarioGeometry,
    num_paths: usize,
    rng: &mut R,
) -> Result<ChannelSet> {
    model.validate()?;
    scenario.validate()?;
    let bs_irs = build_bs_irs_channel(model, geometry_bs, geometry_irs, scenario, rng)?;
    let irs_bob = build_irs_user_channel(model, geometry_irs, scenario, num_paths, rng)?;
    let (irs_eve, bs_eve) = match scenario.eve_site {
        EveSite::Irs => (
            Some(build_irs_eve_channel(model, geometry_irs, scenario, num_paths, rng)?),
            None,
        ),
        EveSite::Bs => (
            None,
            Some(build_direct_bs_eve_channel(model, geometry_bs, scenario, num_paths, rng)?),
        ),
    };
    apply_blocking(
        &ChannelSet {
            bs_irs,
            irs_bob,
            irs_eve,
            bs_eve,
        },
        scenario,
    )
}

/// Power-splitting blockage: the blocked share ρ of the beam is removed from
/// the legitimate path (amplitude √(1−ρ)) and added to Eve's own channel
/// (amplitude √ρ).
///
/// For BS-beam blocking Eve is a single antenna, so the intercepted share is
/// that of one IRS element: √ρ · conj(gain)/√N · b.
pub fn apply_blocking(channels: &ChannelSet, scenario: &ScenarioGeometry) -> Result<ChannelSet> {
    let rho = scenario.blocking_fraction;
    check_rho(rho)?;
    let mut out = channels.clone();
    if rho == 0.0 {
        return Ok(out);
    }
    match scenario.blocking_target {
        BlockingTarget::None => {}
        BlockingTarget::IrsBeam => {
            let eve = channels
                .irs_eve
                .as_ref()
                .ok_or(Error::Domain("IRS-beam blocking needs an IRS→Eve channel".into()))?;
            out.irs_bob = channels.irs_bob.scaled((1.0 - rho).sqrt());
            out.irs_eve = Some(eve.merged(&channels.irs_bob.scaled(rho.sqrt())));
        }
        BlockingTarget::BsBeam => {
            let eve = channels
                .bs_eve
                .as_ref()
                .ok_or(Error::Domain("BS-beam blocking needs a direct BS→Eve channel".into()))?;
            let n = channels.num_irs() as f64;
            out.bs_irs.gain = channels.bs_irs.gain * (1.0 - rho).sqrt();
            let intercepted = PathComponent {
                alpha: channels.bs_irs.gain.conj(),
                weight: (rho / n).sqrt(),
                steering: channels.bs_irs.bs_steering.clone(),
            };
            let mut paths = eve.paths.clone();
            paths.push(intercepted);
            out.bs_eve = Some(MultipathChannel::from_paths(eve.vector.len(), paths));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn scenario() -> ScenarioGeometry {
        ScenarioGeometry::default()
    }

    fn k0_model() -> PathGainModel {
        PathGainModel {
            absorption_coefficient: 0.0,
            ..PathGainModel::default()
        }
    }

    #[test]
    fn ula_broadside_is_uniform() {
        let g = ArrayGeometry::ula(4, 0.5).unwrap();
        let a = steering_ula(&g, 0.0).unwrap();
        for x in a.iter() {
            assert_relative_eq!(x.re, 0.5, epsilon = 1e-15);
            assert_relative_eq!(x.im, 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn ula_endfire_half_wavelength_alternates() {
        let g = ArrayGeometry::ula(2, 0.5).unwrap();
        let a = steering_ula(&g, FRAC_PI_2).unwrap();
        assert_relative_eq!(a[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(a[1].re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(a[1].im.abs() < 1e-15);
    }

    #[test]
    fn ura_matches_per_element_phases() {
        let g = ArrayGeometry::ura(2, 2, 0.5).unwrap();
        let a = steering_ura(&g, 0.0, 0.0).unwrap();
        assert!(a.iter().all(|x| (x - Complex64::new(0.5, 0.0)).norm() < 1e-15));

        let (az, el) = (FRAC_PI_2, 0.0);
        let a = steering_ura(&g, az, el).unwrap();
        for r in 0..2 {
            for c in 0..2 {
                let phase = TAU * 0.5 * (r as f64 * az.sin() * el.cos() + c as f64 * el.sin());
                let want = Complex64::new(phase.cos(), phase.sin()) * 0.5;
                assert!((a[r * 2 + c] - want).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn steering_rejects_wrong_kind() {
        let ula = ArrayGeometry::ula(4, 0.5).unwrap();
        let ura = ArrayGeometry::ura(2, 2, 0.5).unwrap();
        assert!(matches!(steering_ura(&ula, 0.0, 0.0), Err(Error::GeometryMismatch { .. })));
        assert!(matches!(steering_ula(&ura, 0.0), Err(Error::GeometryMismatch { .. })));
    }

    #[test]
    fn geometry_validation() {
        assert!(ArrayGeometry::ula(0, 0.5).is_err());
        assert!(ArrayGeometry::ula(4, 0.0).is_err());
        assert!(ArrayGeometry::ura(0, 3, 0.5).is_err());
        let g = ArrayGeometry::square_ura(10, 0.5).unwrap();
        assert_eq!(g.kind(), ArrayKind::Ura { rows: 2, cols: 5 });
        let g = ArrayGeometry::square_ura(7, 0.5).unwrap();
        assert_eq!(g.kind(), ArrayKind::Ura { rows: 1, cols: 7 });
    }

    #[test]
    fn path_gain_values() {
        let m = k0_model();
        let mag = m.gain_magnitude(5.0).unwrap();
        let want = SPEED_OF_LIGHT / (4.0 * PI * 0.3e12 * 5.0);
        assert_relative_eq!(mag, want, max_relative = 1e-14);
        assert_relative_eq!(mag, 1.5915e-5, max_relative = 1e-3);
        assert_relative_eq!(m.gain_magnitude(10.0).unwrap(), mag / 2.0, max_relative = 1e-14);

        let absorbing = PathGainModel::default();
        assert_relative_eq!(
            absorbing.gain_magnitude(5.0).unwrap(),
            mag * (-0.00825f64).exp(),
            max_relative = 1e-14
        );
        assert!(matches!(m.gain_magnitude(0.0), Err(Error::Domain(_))));
        assert!(matches!(m.gain_magnitude(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn rank_one_gain_composition() {
        let model = k0_model();
        let bs = ArrayGeometry::ula(16, 0.5).unwrap();
        let irs = ArrayGeometry::ura(2, 2, 0.5).unwrap();
        let mut rng = stream(1);
        let ch = build_bs_irs_channel(&model, &bs, &irs, &scenario(), &mut rng).unwrap();
        let g = db_to_linear(12.0);
        let want = 64f64.sqrt() * g * g * model.gain_magnitude(5.0).unwrap();
        assert_relative_eq!(ch.gain.norm(), want, max_relative = 1e-12);
        assert_relative_eq!(ch.matrix().norm(), ch.gain.norm(), max_relative = 1e-12);
    }

    #[test]
    fn multipath_single_path_is_scaled_steering() {
        let model = PathGainModel::default();
        let irs = ArrayGeometry::ura(2, 3, 0.5).unwrap();
        let mut rng = stream(2);
        let ch = build_irs_user_channel(&model, &irs, &scenario(), 1, &mut rng).unwrap();
        let m0 = ch.vector[0].norm();
        assert!(ch.vector.iter().all(|x| (x.norm() - m0).abs() < 1e-12 * m0));
        assert!(matches!(
            build_irs_user_channel(&model, &irs, &scenario(), 0, &mut rng),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn direct_channel_is_over_bs_array() {
        let model = PathGainModel::default();
        let bs = ArrayGeometry::ula(8, 0.5).unwrap();
        let mut rng = stream(5);
        let ch = build_direct_bs_eve_channel(&model, &bs, &scenario(), 3, &mut rng).unwrap();
        assert_eq!(ch.vector.len(), 8);
        assert!((ch.resum() - &ch.vector).norm() <= 1e-12 * ch.vector.norm());
    }

    fn channel_set(site: EveSite) -> ChannelSet {
        let model = PathGainModel::default();
        let bs = ArrayGeometry::ula(8, 0.5).unwrap();
        let irs = ArrayGeometry::ura(2, 2, 0.5).unwrap();
        let sc = ScenarioGeometry {
            eve_site: site,
            ..scenario()
        };
        build_channel_set(&model, &bs, &irs, &sc, 3, &mut stream(11)).unwrap()
    }

    #[test]
    fn blocking_irs_beam() {
        let base = channel_set(EveSite::Irs);
        let mut sc = ScenarioGeometry {
            blocking_target: BlockingTarget::IrsBeam,
            ..scenario()
        };
        assert_eq!(apply_blocking(&base, &sc).unwrap(), base);

        sc.blocking_fraction = 1.0;
        let full = apply_blocking(&base, &sc).unwrap();
        assert!(full.irs_bob.vector.norm() == 0.0);

        sc.blocking_fraction = 0.5;
        let half = apply_blocking(&base, &sc).unwrap();
        assert_relative_eq!(
            half.irs_bob.vector.norm_squared(),
            0.5 * base.irs_bob.vector.norm_squared(),
            max_relative = 1e-12
        );
        let eve = half.irs_eve.unwrap();
        let want = base.irs_eve.as_ref().unwrap().vector.clone() + &base.irs_bob.vector * Complex64::from(0.5f64.sqrt());
        assert!((eve.vector - &want).norm() < 1e-12 * want.norm());
        assert_eq!(eve.paths.len(), 6);

        sc.blocking_fraction = 1.5;
        assert!(matches!(apply_blocking(&base, &sc), Err(Error::Domain(_))));
    }

    #[test]
    fn blocking_bs_beam() {
        let base = channel_set(EveSite::Bs);
        assert!(base.irs_eve.is_none());
        let sc = ScenarioGeometry {
            eve_site: EveSite::Bs,
            blocking_target: BlockingTarget::BsBeam,
            blocking_fraction: 0.5,
            ..scenario()
        };
        let out = apply_blocking(&base, &sc).unwrap();
        assert_relative_eq!(out.bs_irs.gain.norm_sqr(), 0.5 * base.bs_irs.gain.norm_sqr(), max_relative = 1e-12);
        let eve = out.bs_eve.unwrap();
        assert_eq!(eve.paths.len(), base.bs_eve.as_ref().unwrap().paths.len() + 1);
        assert!((eve.resum() - &eve.vector).norm() < 1e-12 * eve.vector.norm());
    }

    #[test]
    fn mismatched_blocking_site_rejected() {
        let sc = ScenarioGeometry {
            eve_site: EveSite::Irs,
            blocking_target: BlockingTarget::BsBeam,
            ..scenario()
        };
        assert!(matches!(sc.validate(), Err(Error::Config(_))));
    }
}
