use super::{Model, Trajectory};
use crate::error::{Error, Result};

impl Model {
    /// Largest deviation, per component, between the trajectory and its
    /// variation-of-constants representation
    ///
    /// ```text
    /// w(t) = w(0) exp(int_0^t q(v(s)) ds)
    /// v(t) = exp(-mu t) [v(0) + int_0^t exp(mu s) b2(s) ds]
    /// ```
    ///
    /// over `sample_times`. Integrals use Simpson's rule on each step of the
    /// trajectory grid with the midpoint read from the dense output.
    pub fn voc_residual(&self, traj: &Trajectory, sample_times: &[f64]) -> Result<[f64; 2]> {
        let recs = &traj.records;
        let mu = self.rates.params.mu;
        let t_end = traj.t_end();
        let qv = |s: f64| self.rates.q(traj.value(s)[1]);
        let b2 = |s: f64| -> Result<f64> { Ok(self.evaluate(&traj.segment_at(s)?)?.b2) };

        // cumulative integrals at each record time
        let mut iq = vec![0.0; recs.len()];
        let mut ib = vec![0.0; recs.len()];
        for i in 1..recs.len() {
            let (a, b) = (recs[i - 1].t, recs[i].t);
            let m = 0.5 * (a + b);
            let hq = (qv(a)? + 4.0 * qv(m)? + qv(b)?) * (b - a) / 6.0;
            let fb = |s: f64, v: f64| (mu * s).exp() * v;
            let hb = (fb(a, recs[i - 1].b2) + 4.0 * fb(m, b2(m)?) + fb(b, recs[i].b2)) * (b - a) / 6.0;
            iq[i] = iq[i - 1] + hq;
            ib[i] = ib[i - 1] + hb;
        }

        let x0 = traj.value(0.0);
        let mut worst = [0.0f64; 2];
        for &t in sample_times {
            if !(t >= 0.0 && t <= t_end) {
                return Err(Error::InvalidOption(format!("sample time {t} outside [0, {t_end}]")));
            }
            let i = recs.partition_point(|r| r.t <= t) - 1;
            let (mut jq, mut jb) = (iq[i], ib[i]);
            let a = recs[i].t;
            if t > a {
                let m = 0.5 * (a + t);
                jq += (qv(a)? + 4.0 * qv(m)? + qv(t)?) * (t - a) / 6.0;
                jb += ((mu * a).exp() * recs[i].b2 + 4.0 * (mu * m).exp() * b2(m)? + (mu * t).exp() * b2(t)?) * (t - a)
                    / 6.0;
            }
            let x = traj.value(t);
            let r0 = (x[0] - x0[0] * jq.exp()).abs();
            let r1 = (x[1] - (-mu * t).exp() * (x0[1] + jb)).abs();
            worst[0] = worst[0].max(r0);
            worst[1] = worst[1].max(r1);
        }
        Ok(worst)
    }
}
