# Database package 