# Schemas package 