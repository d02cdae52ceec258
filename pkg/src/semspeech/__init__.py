"""Task-oriented semantic speech transmission simulator.

Speech spectrograms are mapped by a trainable encoder to CTC token
posteriors, turned into unit-power channel symbols, sent over flat fading
channels, and decoded back to text. Classical digital baselines (Huffman or
IEEE 754 source coding, polar coding, 64-QAM) are provided for comparison.
"""

__version__ = "0.1.0"
