//! Fixed synthetic design matrices for the data-weighting fixture (seed 20240917).

pub(super) const TRAIN_A_DESIGN: [[f64; 3]; 20] = [
    [0.163, -0.342, -0.699],
    [0.931, -1.242, 0.751],
    [0.818, -0.379, -2.340],
    [2.683, -0.460, -0.462],
    [1.494, 0.832, -2.081],
    [0.589, 0.837, -0.008],
    [-2.305, -2.013, 0.632],
    [-0.013, -0.986, 1.575],
    [0.656, 0.121, -0.309],
    [1.301, 0.378, 0.859],
    [-0.455, -0.954, 1.546],
    [0.336, -1.972, -1.246],
    [-0.721, -1.070, -0.357],
    [-0.438, 1.632, 0.978],
    [0.886, 1.832, 0.820],
    [-1.077, -0.549, 2.201],
    [0.307, 0.620, -0.319],
    [0.093, 0.131, 1.131],
    [-1.445, 0.072, 0.378],
    [-1.392, 0.389, -0.131],
];
pub(super) const TRAIN_A_TARGET: [f64; 20] = [
    -0.000, 2.126, 0.819, 4.123, 1.295, 0.515, -2.273, 0.875, 0.882, 2.055, 0.199, 1.099, -0.674,
    -1.170, 0.619, -0.864, 0.018, 0.250, -2.155, -2.272,
];
pub(super) const TRAIN_B_DESIGN: [[f64; 3]; 20] = [
    [0.096, -1.061, 0.643],
    [0.061, 0.786, -0.272],
    [-1.694, -0.789, -0.493],
    [1.245, -0.919, 0.385],
    [-0.650, 0.419, -0.021],
    [-1.073, 1.648, 0.584],
    [0.016, 0.025, -0.224],
    [-0.132, 0.612, -1.494],
    [-0.071, -0.843, -0.226],
    [0.491, 0.081, 0.170],
    [0.467, -1.072, -0.853],
    [0.613, -0.670, -0.184],
    [-1.102, -0.977, 0.987],
    [0.886, 2.158, -2.939],
    [-0.072, 0.485, -1.446],
    [-0.447, 0.278, 1.023],
    [1.992, 0.104, 0.481],
    [-0.444, -1.380, -0.057],
    [-0.290, 0.135, 0.542],
    [-0.395, -0.073, 1.377],
];
pub(super) const TRAIN_B_TARGET: [f64; 20] = [
    0.142, 0.072, -0.850, 0.601, -0.476, -0.325, -0.096, -0.474, -0.129, 0.282, 0.080, 0.335,
    -0.263, -0.299, -0.311, 0.012, 1.138, -0.330, 0.081, 0.055,
];
pub(super) const VALID_A_DESIGN: [[f64; 3]; 20] = [
    [0.351, 1.389, 0.153],
    [-0.023, 2.262, -1.194],
    [-0.885, -1.701, 0.170],
    [-0.013, -0.304, 0.009],
    [-1.305, 1.482, -1.411],
    [0.093, -0.724, -0.179],
    [0.498, 0.662, 1.924],
    [0.642, -0.882, -0.563],
    [0.392, 1.303, 0.912],
    [0.450, -0.471, -0.458],
    [-1.519, -0.344, -0.816],
    [-0.263, 0.649, 0.281],
    [0.100, -0.913, -0.404],
    [0.817, 1.288, -0.346],
    [0.534, 0.348, 1.511],
    [0.473, 0.585, 0.410],
    [-0.102, -0.375, 0.246],
    [-1.367, 0.274, 0.363],
    [-0.718, -0.040, 0.884],
    [-0.464, -0.384, 1.215],
];
pub(super) const VALID_A_TARGET: [f64; 20] = [
    -0.374, -1.461, -0.235, 0.098, -2.840, 0.370, 0.816, 1.072, 0.072, 0.617, -2.168, -0.543,
    0.543, 0.347, 0.941, 0.408, 0.208, -1.701, -0.636, 0.063,
];
pub(super) const VALID_B_DESIGN: [[f64; 3]; 20] = [
    [0.494, -0.459, 0.010],
    [0.027, 0.265, -0.077],
    [-0.269, -0.440, -0.286],
    [1.323, -1.454, 0.119],
    [-0.950, -0.733, 0.745],
    [0.141, -1.067, -0.506],
    [-0.449, -2.045, -1.307],
    [1.161, -1.190, -0.865],
    [-0.865, -0.925, 0.368],
    [0.041, 0.558, -0.615],
    [-0.431, 0.711, -1.865],
    [0.366, 1.207, 1.054],
    [-0.709, 1.167, 0.011],
    [-0.937, -0.281, -0.283],
    [0.879, -1.838, -0.029],
    [-0.169, 0.936, -0.176],
    [-1.476, 0.511, -0.382],
    [1.311, -0.391, -1.971],
    [-0.149, -0.099, 0.044],
    [-0.384, 2.585, -1.626],
];
pub(super) const VALID_B_TARGET: [f64; 20] = [
    0.582, 0.039, -0.212, 1.224, -0.285, 0.138, -0.289, 0.753, -0.470, -0.219, -0.918, 0.280,
    -0.644, -0.583, 0.976, -0.260, -1.205, 0.583, -0.003, -1.207,
];
