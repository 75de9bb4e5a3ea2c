"""core: the mesh, walk, network, loss, training and evaluation layers of walkssl."""
