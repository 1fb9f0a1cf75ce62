use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module(code: &std::ffi::CStr) {
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(_qmuq::_qmuq)(py);
        let globals = PyDict::new(py);
        globals.set_item("q", m).unwrap();
        if let Err(e) = py.run(code, Some(&globals), None) {
            e.print(py);
            panic!("python snippet failed");
        }
    });
}

#[test]
fn statevector_and_intervals() {
    with_module(
        c"
import math
s = q.StateVector(2)
s.ry(0, math.acos(0.6))
assert abs(s.expectation_z(0) - 0.6) < 1e-12
assert abs(s.expectation_z(1) - 1.0) < 1e-12
s.cnot(0, 1)
assert abs(sum(s.probabilities()) - 1.0) < 1e-12
assert abs(s.expectation_z(1) - 0.6) < 1e-12
m = s.sample_mean(0, 20000, 7)
assert abs(m - 0.6) < 0.03
assert m == s.sample_mean(0, 20000, 7)

assert abs(q.born_variance(0.6, 100) - 0.0064) < 1e-15
lo, hi = q.quantum_interval(0.0, 10000, 0.95)
assert abs(hi - 1.959963984540054 / 100) < 1e-9 and abs(lo + hi) < 1e-15
assert abs(q.normal_quantile(0.975) - 1.959963984540054) < 1e-8
assert q.info_bits('quantum', 1, n_qubits=4) == 4.0
assert q.info_bits('ensemble', 8) == 3.0
try:
    q.quantum_interval(1.5, 10, 0.9)
    raise AssertionError('accepted <Z> > 1')
except ValueError:
    pass
",
    );
}

#[test]
fn model_prediction_gradient_and_training() {
    with_module(
        c"
m = q.VqcModel(3, 2, seed=5)
assert m.n_params == 12 and len(m.theta) == 12
u = m.predict([0.2, -0.4])
assert -1.0 <= u <= 1.0
mean, var = m.predict_shots([0.2, -0.4], 1000, 1)
assert abs(mean - u) < 0.15 and var > 0
g = m.gradient([0.2, -0.4])
h = 1e-6
th = list(m.theta)
th[3] += h
up = q.VqcModel.from_params(3, 2, th).predict([0.2, -0.4])
th[3] -= 2 * h
dn = q.VqcModel.from_params(3, 2, th).predict([0.2, -0.4])
assert abs((up - dn) / (2 * h) - g[3]) < 1e-6

trace = m.train('heat', lambda_physics=1.0, epochs=40)
assert len(trace) == 41 and trace[-1] < trace[0]
assert abs(q.exact_solution('heat', 0.5, 0.0) - 1.0) < 1e-12
",
    );
}

#[test]
fn calibration_and_experiment_runner() {
    with_module(
        c"
levels, emp, ece = q.calibration([0.0] * 4, [1.0] * 4, [0.0, 0.1, -0.1, 3.0])
assert len(levels) == 19 and len(emp) == 19 and 0.0 <= ece <= 1.0
names = [n for n, _ in q.list_experiments()]
assert 'variance-scaling' in names and len(names) == 6
cfg = 'experiment = variance-scaling\\nrepetitions = 50\\nshots = 10, 100\\nexpectations = 0.5\\n'
a = q.run_experiment(cfg, seed=3)
b = q.run_experiment(cfg, seed=3)
assert a == b and list(a) == ['variance_scaling']
assert a['variance_scaling'].startswith('expectation,shots')
try:
    q.run_experiment('experiment = nope\\n')
    raise AssertionError('accepted unknown experiment')
except ValueError:
    pass
",
    );
}
