# Differentially private GAN toolkit
