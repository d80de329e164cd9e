use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use super::layers::{outer, sigmoid_scalar, uniform1, uniform2};
use super::Parameterized;
use crate::rng::Rng;

/// One LSTM direction. Gate blocks are stacked in the order input, forget,
/// cell candidate, output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmCell {
    pub wx: Array2<f64>,
    pub wh: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone)]
struct Step {
    t: usize,
    h_prev: Array1<f64>,
    c_prev: Array1<f64>,
    i: Array1<f64>,
    f: Array1<f64>,
    g: Array1<f64>,
    o: Array1<f64>,
    tanh_c: Array1<f64>,
}

impl LstmCell {
    pub fn new(inputs: usize, hidden: usize, rng: &mut Rng) -> Self {
        let scale = 1.0 / (hidden as f64).sqrt();
        LstmCell {
            wx: uniform2(4 * hidden, inputs, scale, rng),
            wh: uniform2(4 * hidden, hidden, scale, rng),
            b: uniform1(4 * hidden, scale, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.wh.ncols()
    }

    /// Runs over `order` (timestep indices) and returns the hidden state per
    /// processed step plus the cache for backpropagation.
    fn run(&self, xs: ArrayView2<f64>, order: &[usize]) -> (Vec<Array1<f64>>, Vec<Step>) {
        let h = self.hidden();
        let mut h_prev = Array1::zeros(h);
        let mut c_prev = Array1::zeros(h);
        let mut hs = Vec::with_capacity(order.len());
        let mut steps = Vec::with_capacity(order.len());
        for &t in order {
            let a = self.wx.dot(&xs.row(t)) + self.wh.dot(&h_prev) + &self.b;
            let i = a.slice(s![0..h]).mapv(sigmoid_scalar);
            let f = a.slice(s![h..2 * h]).mapv(sigmoid_scalar);
            let g = a.slice(s![2 * h..3 * h]).mapv(f64::tanh);
            let o = a.slice(s![3 * h..4 * h]).mapv(sigmoid_scalar);
            let c = &f * &c_prev + &i * &g;
            let tanh_c = c.mapv(f64::tanh);
            let h_t = &o * &tanh_c;
            steps.push(Step {
                t,
                h_prev: std::mem::replace(&mut h_prev, h_t.clone()),
                c_prev: std::mem::replace(&mut c_prev, c),
                i,
                f,
                g,
                o,
                tanh_c,
            });
            hs.push(h_t);
        }
        (hs, steps)
    }

    /// Backpropagation through time. `dh[t]` is the loss gradient arriving
    /// at the hidden state of timestep `t`; input gradients are added to `dx`.
    fn backward(&self, xs: ArrayView2<f64>, steps: &[Step], dh: ArrayView2<f64>, dx: &mut Array2<f64>, grad: &mut LstmCell) {
        let h = self.hidden();
        let mut dh_next = Array1::zeros(h);
        let mut dc_next = Array1::zeros(h);
        let mut da = Array1::zeros(4 * h);
        for st in steps.iter().rev() {
            let dh_t = &dh.row(st.t) + &dh_next;
            let dc = &dc_next + &(&dh_t * &st.o * &st.tanh_c.mapv(|x| 1.0 - x * x));
            let d_o = &dh_t * &st.tanh_c;
            let d_i = &dc * &st.g;
            let d_g = &dc * &st.i;
            let d_f = &dc * &st.c_prev;
            dc_next = &dc * &st.f;
            da.slice_mut(s![0..h]).assign(&(&d_i * &st.i.mapv(|x| x * (1.0 - x))));
            da.slice_mut(s![h..2 * h]).assign(&(&d_f * &st.f.mapv(|x| x * (1.0 - x))));
            da.slice_mut(s![2 * h..3 * h]).assign(&(&d_g * &st.g.mapv(|x| 1.0 - x * x)));
            da.slice_mut(s![3 * h..4 * h]).assign(&(&d_o * &st.o.mapv(|x| x * (1.0 - x))));
            let x = xs.row(st.t);
            grad.wx += &outer(da.view(), x);
            grad.wh += &outer(da.view(), st.h_prev.view());
            grad.b += &da;
            let mut dx_row = dx.row_mut(st.t);
            dx_row += &self.wx.t().dot(&da);
            dh_next = self.wh.t().dot(&da);
        }
    }
}

impl Parameterized for LstmCell {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        f(self.wx.as_slice().expect("standard layout"));
        f(self.wh.as_slice().expect("standard layout"));
        f(self.b.as_slice().expect("standard layout"));
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        f(self.wx.as_slice_mut().expect("standard layout"));
        f(self.wh.as_slice_mut().expect("standard layout"));
        f(self.b.as_slice_mut().expect("standard layout"));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstm {
    pub forward: LstmCell,
    pub backward: LstmCell,
}

#[derive(Debug, Clone)]
pub struct BiLstmCache {
    input: Array2<f64>,
    fwd: Vec<Step>,
    bwd: Vec<Step>,
}

impl BiLstm {
    pub fn new(inputs: usize, hidden: usize, rng: &mut Rng) -> Self {
        BiLstm {
            forward: LstmCell::new(inputs, hidden, rng),
            backward: LstmCell::new(inputs, hidden, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.forward.hidden()
    }

    /// `T x d` states to `T x 2H`: forward state then backward state per
    /// timestep.
    pub fn forward_cached(&self, states: ArrayView2<f64>) -> (Array2<f64>, BiLstmCache) {
        let t_len = states.nrows();
        let h = self.hidden();
        let order: Vec<usize> = (0..t_len).collect();
        let rev: Vec<usize> = order.iter().rev().copied().collect();
        let (hf, fwd) = self.forward.run(states, &order);
        let (hb, bwd) = self.backward.run(states, &rev);
        let mut out = Array2::zeros((t_len, 2 * h));
        for (k, &t) in order.iter().enumerate() {
            out.slice_mut(s![t, 0..h]).assign(&hf[k]);
        }
        for (k, &t) in rev.iter().enumerate() {
            out.slice_mut(s![t, h..2 * h]).assign(&hb[k]);
        }
        (
            out,
            BiLstmCache {
                input: states.to_owned(),
                fwd,
                bwd,
            },
        )
    }

    pub fn backward_pass(&self, cache: &BiLstmCache, d_out: ArrayView2<f64>, grad: &mut BiLstm) -> Array2<f64> {
        let h = self.hidden();
        let mut dx = Array2::zeros(cache.input.raw_dim());
        self.forward
            .backward(cache.input.view(), &cache.fwd, d_out.slice(s![.., 0..h]), &mut dx, &mut grad.forward);
        self.backward
            .backward(cache.input.view(), &cache.bwd, d_out.slice(s![.., h..2 * h]), &mut dx, &mut grad.backward);
        dx
    }
}

impl Parameterized for BiLstm {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        self.forward.visit(f);
        self.backward.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        self.forward.visit_mut(f);
        self.backward.visit_mut(f);
    }
}

/// BiLSTM over encoder states; output width `2H`.
pub fn bilstm_forward(states: ArrayView2<f64>, params: &BiLstm) -> Array2<f64> {
    params.forward_cached(states).0
}

/// `[final forward state; final backward state]`, the latter sitting at
/// timestep 0.
pub fn final_states(out: ArrayView2<f64>, hidden: usize) -> Array1<f64> {
    let t_last = out.nrows() - 1;
    let mut v = Array1::zeros(2 * hidden);
    v.slice_mut(s![0..hidden]).assign(&out.slice(s![t_last, 0..hidden]));
    v.slice_mut(s![hidden..]).assign(&out.slice(s![0, hidden..2 * hidden]));
    v
}

pub(crate) fn final_states_backward(d_pool: ArrayView1<f64>, t_len: usize, hidden: usize) -> Array2<f64> {
    let mut d = Array2::zeros((t_len, 2 * hidden));
    d.slice_mut(s![t_len - 1, 0..hidden]).assign(&d_pool.slice(s![0..hidden]));
    d.slice_mut(s![0, hidden..2 * hidden]).assign(&d_pool.slice(s![hidden..]));
    d
}
