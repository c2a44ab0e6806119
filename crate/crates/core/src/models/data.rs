//! Small reference datasets used by the examples and tests.

/// Twenty variates of a linear trend `t − 5` plus normal noise with
/// standard deviation 5, for `t = 1..=20`.
pub fn linear_trend() -> Vec<f64> {
    vec![
        -2.119453760526702,
        5.290814814602713,
        3.3477370212059263,
        -1.524427844666869,
        -2.11767611724241,
        -3.1393019984876567,
        0.031583398832589316,
        4.492170566086558,
        12.075689120209544,
        -5.734583134742884,
        4.817685166491335,
        -0.38732268295202754,
        -0.2451087678267534,
        5.476406521028064,
        13.513668326933141,
        7.824341452223766,
        9.279650356164751,
        11.640247250501195,
        16.724560475349527,
        9.74407257497221,
    ]
}

/// Three groups of six normal variates with means 4, 9 and 10 and common
/// standard deviation 3.
pub fn three_groups() -> Vec<Vec<f64>> {
    vec![
        vec![3.57329, 6.5655, -2.06033, 0.469477, 3.05632, 5.54063],
        vec![9.83132, 9.7379, 6.6339, 8.20049, 7.19737, 9.19586],
        vec![9.80335, 8.79726, 13.6045, 9.4932, 8.50685, 9.22433],
    ]
}

/// Ten one-hot draws from three categories, with cell counts `(3, 5, 2)`.
pub fn multinomial_draws() -> Vec<Vec<u8>> {
    [1, 1, 2, 0, 1, 1, 1, 0, 2, 0]
        .iter()
        .map(|&c| {
            let mut row = vec![0u8; 3];
            row[c] = 1;
            row
        })
        .collect()
}

/// Two lists of 24 integer values whose bin counts over six width-5 bins
/// on `[0, 30)` sit at different chi-squared distances from the target
/// counts `(2, 4, 10, 4, 2, 2)`.
pub fn binned_samples() -> [Vec<i64>; 2] {
    [
        vec![
            13, 7, 6, 12, 10, 14, 8, 19, 5, 3, 20, 12, 18, 11, 11, 17, 12, 2, 12, 28, 6, 25, 21, 1,
        ],
        vec![
            26, 9, 6, 12, 16, 10, 8, 28, 5, 21, 0, 12, 1, 12, 11, 10, 17, 19, 24, 11, 16, 19, 13, 11,
        ],
    ]
}
