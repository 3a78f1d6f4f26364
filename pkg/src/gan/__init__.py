"""
GAN core package for asyndgan-desk
Model definitions and the distributed adversarial losses
"""

from src.gan.losses import (
    Feedback, FeedbackScalars, accumulate_generator_gradients, discriminator_loss,
    generator_feedback, generator_step,
)
from src.gan.models import (
    SIGMOID_CLAMP, AdversarialForm, ChannelBatch, DiscriminatorModel, GeneratorModel,
    LabeledBatch, LossConfig,
)

__all__ = [
    'Feedback', 'FeedbackScalars', 'accumulate_generator_gradients', 'discriminator_loss',
    'generator_feedback', 'generator_step',
    'SIGMOID_CLAMP', 'AdversarialForm', 'ChannelBatch', 'DiscriminatorModel', 'GeneratorModel',
    'LabeledBatch', 'LossConfig',
]
