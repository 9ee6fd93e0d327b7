//! 256-entry Spectral-reversed colormap (8-bit sRGB), sampled uniformly on [0, 1].

pub(crate) const SPECTRAL_R: [[u8; 3]; 256] = [
    [94, 79, 162],
    [92, 81, 163],
    [91, 83, 164],
    [89, 86, 165],
    [87, 88, 166],
    [85, 90, 167],
    [84, 92, 168],
    [82, 95, 169],
    [80, 97, 170],
    [78, 99, 172],
    [77, 101, 173],
    [75, 104, 174],
    [73, 106, 175],
    [72, 108, 176],
    [70, 110, 177],
    [68, 113, 178],
    [66, 115, 179],
    [65, 117, 180],
    [63, 119, 181],
    [61, 121, 182],
    [59, 124, 183],
    [58, 126, 184],
    [56, 128, 185],
    [54, 130, 186],
    [53, 133, 187],
    [51, 135, 188],
    [51, 137, 189],
    [53, 139, 188],
    [55, 142, 187],
    [57, 144, 186],
    [59, 146, 185],
    [61, 149, 184],
    [63, 151, 183],
    [65, 153, 182],
    [67, 155, 181],
    [69, 158, 180],
    [71, 160, 179],
    [73, 162, 178],
    [75, 164, 177],
    [78, 167, 176],
    [80, 169, 175],
    [82, 171, 174],
    [84, 174, 173],
    [86, 176, 173],
    [88, 178, 172],
    [90, 180, 171],
    [92, 183, 170],
    [94, 185, 169],
    [96, 187, 168],
    [98, 189, 167],
    [100, 192, 166],
    [102, 194, 165],
    [105, 195, 165],
    [107, 196, 165],
    [110, 197, 165],
    [113, 198, 165],
    [116, 199, 165],
    [118, 200, 165],
    [121, 201, 165],
    [124, 202, 165],
    [126, 204, 165],
    [129, 205, 165],
    [132, 206, 165],
    [134, 207, 165],
    [137, 208, 164],
    [140, 209, 164],
    [143, 210, 164],
    [145, 211, 164],
    [148, 212, 164],
    [151, 213, 164],
    [153, 214, 164],
    [156, 215, 164],
    [159, 216, 164],
    [162, 217, 164],
    [164, 218, 164],
    [167, 219, 164],
    [170, 220, 164],
    [172, 221, 164],
    [174, 222, 163],
    [177, 223, 163],
    [179, 224, 162],
    [181, 225, 162],
    [184, 226, 161],
    [186, 227, 161],
    [188, 228, 160],
    [191, 229, 160],
    [193, 230, 160],
    [195, 231, 159],
    [198, 232, 159],
    [200, 233, 158],
    [202, 234, 158],
    [205, 235, 157],
    [207, 236, 157],
    [209, 237, 156],
    [211, 237, 156],
    [214, 238, 155],
    [216, 239, 155],
    [218, 240, 154],
    [221, 241, 154],
    [223, 242, 153],
    [225, 243, 153],
    [228, 244, 152],
    [230, 245, 152],
    [231, 245, 154],
    [232, 246, 155],
    [233, 246, 157],
    [234, 247, 158],
    [235, 247, 160],
    [236, 247, 161],
    [237, 248, 163],
    [238, 248, 164],
    [239, 249, 166],
    [240, 249, 167],
    [241, 249, 169],
    [242, 250, 170],
    [243, 250, 172],
    [244, 250, 173],
    [245, 251, 175],
    [246, 251, 176],
    [247, 252, 178],
    [248, 252, 180],
    [249, 252, 181],
    [250, 253, 183],
    [251, 253, 184],
    [252, 254, 186],
    [253, 254, 187],
    [254, 254, 189],
    [255, 255, 190],
    [255, 254, 190],
    [255, 253, 188],
    [255, 252, 186],
    [255, 251, 184],
    [255, 250, 182],
    [255, 248, 180],
    [255, 247, 178],
    [255, 246, 176],
    [255, 245, 174],
    [255, 243, 172],
    [255, 242, 170],
    [255, 241, 168],
    [255, 240, 166],
    [254, 239, 163],
    [254, 237, 161],
    [254, 236, 159],
    [254, 235, 157],
    [254, 234, 155],
    [254, 233, 153],
    [254, 231, 151],
    [254, 230, 149],
    [254, 229, 147],
    [254, 228, 145],
    [254, 226, 143],
    [254, 225, 141],
    [254, 224, 139],
    [254, 222, 137],
    [254, 220, 136],
    [254, 218, 134],
    [254, 216, 132],
    [254, 214, 131],
    [254, 212, 129],
    [254, 210, 127],
    [254, 208, 126],
    [254, 206, 124],
    [254, 204, 123],
    [254, 202, 121],
    [254, 200, 119],
    [253, 199, 118],
    [253, 197, 116],
    [253, 195, 114],
    [253, 193, 113],
    [253, 191, 111],
    [253, 189, 109],
    [253, 187, 108],
    [253, 185, 106],
    [253, 183, 104],
    [253, 181, 103],
    [253, 179, 101],
    [253, 177, 99],
    [253, 175, 98],
    [253, 173, 96],
    [252, 170, 95],
    [252, 168, 94],
    [252, 165, 93],
    [251, 163, 92],
    [251, 160, 91],
    [251, 157, 89],
    [250, 155, 88],
    [250, 152, 87],
    [250, 150, 86],
    [249, 147, 85],
    [249, 145, 83],
    [249, 142, 82],
    [248, 140, 81],
    [248, 137, 80],
    [248, 134, 79],
    [247, 132, 78],
    [247, 129, 76],
    [246, 127, 75],
    [246, 124, 74],
    [246, 122, 73],
    [245, 119, 72],
    [245, 117, 71],
    [245, 114, 69],
    [244, 112, 68],
    [244, 109, 67],
    [243, 107, 67],
    [242, 105, 68],
    [240, 103, 68],
    [239, 102, 69],
    [238, 100, 69],
    [237, 98, 70],
    [235, 96, 70],
    [234, 94, 71],
    [233, 92, 71],
    [232, 91, 72],
    [231, 89, 72],
    [229, 87, 73],
    [228, 85, 73],
    [227, 83, 74],
    [226, 81, 74],
    [225, 80, 75],
    [223, 78, 75],
    [222, 76, 75],
    [221, 74, 76],
    [220, 72, 76],
    [218, 70, 77],
    [217, 68, 77],
    [216, 67, 78],
    [215, 65, 78],
    [214, 63, 79],
    [212, 61, 79],
    [210, 58, 78],
    [208, 56, 78],
    [205, 54, 77],
    [203, 51, 77],
    [201, 49, 76],
    [199, 46, 76],
    [197, 44, 75],
    [195, 42, 75],
    [193, 39, 74],
    [190, 37, 74],
    [188, 34, 73],
    [186, 32, 73],
    [184, 30, 72],
    [182, 27, 72],
    [180, 25, 71],
    [177, 23, 71],
    [175, 20, 70],
    [173, 18, 70],
    [171, 15, 69],
    [169, 13, 69],
    [167, 11, 68],
    [164, 8, 68],
    [162, 6, 67],
    [160, 3, 67],
    [158, 1, 66],
];
