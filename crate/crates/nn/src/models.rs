//! Reference architectures.

use rand::Rng;

use crate::layers::{GlobalAvgPool, Relu};
use crate::network::{Builder, Network, Node};

/// Four convolutions covering ordinary, depthwise and pointwise kernels,
/// each followed by batch norm.
pub fn toy_cnn<R: Rng>(in_channels: usize, classes: usize, rng: &mut R) -> Network {
    let mut b = Builder::new(rng);
    let mut nodes = Vec::new();
    nodes.extend(b.conv_bn_relu("conv1", in_channels, 16, 3, 1, 1));
    nodes.extend(b.conv_bn_relu("dw2", 16, 16, 3, 2, 16));
    nodes.extend(b.conv_bn_relu("pw3", 16, 32, 1, 1, 1));
    nodes.extend(b.conv_bn_relu("conv4", 32, 32, 3, 1, 1));
    nodes.push(Node::Pool(GlobalAvgPool::default()));
    nodes.push(b.linear("fc", 32, classes));
    b.finish(nodes)
}

fn basic_block<R: Rng>(b: &mut Builder<'_, R>, name: &str, cin: usize, cout: usize, stride: usize) -> Vec<Node> {
    let mut body = b.conv_bn_relu(&format!("{name}.a"), cin, cout, 3, stride, 1);
    body.push(b.conv(&format!("{name}.b.conv"), cout, cout, 3, 1, 1));
    body.push(b.bn(&format!("{name}.b.bn"), cout));
    let shortcut = if stride != 1 || cin != cout {
        vec![
            b.conv(&format!("{name}.down.conv"), cin, cout, 1, stride, 1),
            b.bn(&format!("{name}.down.bn"), cout),
        ]
    } else {
        Vec::new()
    };
    vec![Node::Residual { body, shortcut }, Node::Relu(Relu::default())]
}

/// ResNet-20 for 32×32 inputs: three stages of three basic blocks at
/// widths 16, 32 and 64.
pub fn resnet20<R: Rng>(in_channels: usize, classes: usize, rng: &mut R) -> Network {
    let mut b = Builder::new(rng);
    let mut nodes = b.conv_bn_relu("stem", in_channels, 16, 3, 1, 1);
    let mut cin = 16;
    for (stage, &width) in [16usize, 32, 64].iter().enumerate() {
        for block in 0..3 {
            let stride = if stage > 0 && block == 0 { 2 } else { 1 };
            nodes.extend(basic_block(&mut b, &format!("layer{}.{block}", stage + 1), cin, width, stride));
            cin = width;
        }
    }
    nodes.push(Node::Pool(GlobalAvgPool::default()));
    nodes.push(b.linear("fc", 64, classes));
    b.finish(nodes)
}

/// Narrow MobileNetV1-style stack of depthwise-separable blocks.
pub fn mobilenet_style<R: Rng>(in_channels: usize, classes: usize, rng: &mut R) -> Network {
    let mut b = Builder::new(rng);
    let mut nodes = b.conv_bn_relu("stem", in_channels, 16, 3, 1, 1);
    let plan: [(usize, usize); 6] = [(32, 1), (64, 2), (64, 1), (128, 2), (128, 1), (256, 2)];
    let mut cin = 16;
    for (i, &(cout, stride)) in plan.iter().enumerate() {
        nodes.extend(b.conv_bn_relu(&format!("block{i}.dw"), cin, cin, 3, stride, cin));
        nodes.extend(b.conv_bn_relu(&format!("block{i}.pw"), cin, cout, 1, 1, 1));
        cin = cout;
    }
    nodes.push(Node::Pool(GlobalAvgPool::default()));
    nodes.push(b.linear("fc", cin, classes));
    b.finish(nodes)
}
